use crate::channel::{snr_db_to_variance, SystemParams};
use crate::error::{Error, Result};
use crate::ocnn::OcnnVariant;

use super::{DetectorSpec, EveKnowledge, Scenario};

pub const STUDY_NAMES: [&str; 4] = ["fig2", "table1", "table2", "table3"];

const ALPHAS: [f64; 3] = [1.0, 0.9, 0.8];
const N_RANGE: std::ops::RangeInclusive<usize> = 1..=6;

/// A named family of scenarios sharing one seed.
#[derive(Debug, Clone, PartialEq)]
pub struct Study {
    pub name: &'static str,
    pub description: &'static str,
    pub scenarios: Vec<Scenario>,
}

impl Study {
    /// Entries whose parameters match `params` exactly.
    pub fn matching<'a>(&'a self, params: &'a SystemParams) -> impl Iterator<Item = &'a Scenario> + 'a {
        self.scenarios.iter().filter(move |s| &s.params == params)
    }
}

fn comparison_grid(prefix: &str, rho_ae: f64, sigma2_ii: f64) -> Vec<Scenario> {
    let detectors = [
        DetectorSpec::Ocnn {
            variant: OcnnVariant::OneK,
        },
        DetectorSpec::llr(),
        DetectorSpec::Combined,
    ];
    let mut out = Vec::new();
    for alpha in ALPHAS {
        for n in N_RANGE {
            let params = SystemParams::uniform(n, alpha, snr_db_to_variance(15.0), sigma2_ii, rho_ae);
            for d in detectors {
                out.push(Scenario::new(format!("{prefix}/alpha={alpha}/N={n}/{d}"), params.clone(), d));
            }
        }
    }
    out
}

/// Look up a study by name.
pub fn study(name: &str) -> Result<Study> {
    let sigma2_ii = snr_db_to_variance(20.0);
    match name {
        "fig2" => Ok(Study {
            name: "fig2",
            description: "mean MD probability versus N, rho_ae = 0.1, SNR_I = 15 dB, noiseless Phase II",
            scenarios: comparison_grid("fig2", 0.1, 0.0),
        }),
        "table1" => {
            let mut scenarios = Vec::new();
            for alpha in [1.0, 0.9] {
                for n in [1, 3, 6] {
                    for step in 1..=10 {
                        let rho = step as f64 / 10.0;
                        let params = SystemParams::uniform(n, alpha, snr_db_to_variance(15.0), sigma2_ii, rho);
                        let mut s = Scenario::new(format!("table1/alpha={alpha}/N={n}/rho_ae={rho}"), params, DetectorSpec::Combined);
                        s.options.eve = EveKnowledge::KnowsAlpha;
                        scenarios.push(s);
                    }
                }
            }
            Ok(Study {
                name: "table1",
                description: "optimal combined-attack exponent per alpha, N and rho_ae",
                scenarios,
            })
        }
        "table2" => Ok(Study {
            name: "table2",
            description: "MD and FA rates per method, rho_ae = 0.1, SNR_I = 15 dB, SNR_II = 20 dB",
            scenarios: comparison_grid("table2", 0.1, sigma2_ii),
        }),
        "table3" => Ok(Study {
            name: "table3",
            description: "MD and FA rates per method, rho_ae = 0.8, SNR_I = 15 dB, SNR_II = 20 dB",
            scenarios: comparison_grid("table3", 0.8, sigma2_ii),
        }),
        other => Err(Error::UnknownScenario(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_study_resolves() {
        for name in STUDY_NAMES {
            let s = study(name).unwrap();
            assert!(!s.scenarios.is_empty());
            for sc in &s.scenarios {
                sc.validate().unwrap();
            }
        }
        assert_eq!(study("table1").unwrap().scenarios.len(), 60);
        assert_eq!(study("table3").unwrap().scenarios.len(), 54);
        assert!(study("fig9").is_err());
    }

    #[test]
    fn fig2_has_noiseless_phase_two() {
        let s = study("fig2").unwrap();
        assert!(s.scenarios.iter().all(|sc| sc.params.sigma2_ii == 0.0 && sc.params.rho_ae == 0.1));
    }
}
