//! Run configuration: a JSON file mirroring [`RunConfig`], with command-line
//! flags taking precedence.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use va_wightman::scalar::parse_rational;
use va_wightman::{Model, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Axioms,
    Gram,
    Roundtrip,
    Correlators,
    ReehSchlieder,
    All,
}

impl Suite {
    pub const EACH: [Suite; 5] = [Suite::Axioms, Suite::Gram, Suite::Roundtrip, Suite::Correlators, Suite::ReehSchlieder];

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => Self::EACH.to_vec(),
            s => vec![s],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum ModelName {
    Heisenberg,
    Virasoro,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelChoice {
    pub name: ModelName,
    /// Central charge as a rational string such as `"-22/5"`; Virasoro only.
    #[serde(default)]
    pub c: Option<String>,
    /// Quotient by the radical of the invariant form.
    #[serde(default)]
    pub simple: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Float identities that hold up to round-off.
    pub float: f64,
    /// Finite Möbius covariance, which also carries truncation error.
    pub covariance: f64,
    /// Relative singular value cutoff of the Reeh-Schlieder experiment.
    pub rank: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { float: 1e-10, covariance: 1e-6, rank: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelChoice,
    /// Truncation weight `N`.
    pub max_weight: usize,
    /// Band `M` of the test functions.
    pub band: usize,
    /// Weights above `N − margin` are excluded from assertions.
    #[serde(default = "default_margin")]
    pub margin: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_suite")]
    pub suite: Suite,
    #[serde(default)]
    pub out: Option<PathBuf>,
    /// Where the correlators suite writes its table.
    #[serde(default)]
    pub csv_out: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    /// Word length of the Reeh-Schlieder experiment.
    #[serde(default = "default_word_length")]
    pub word_length: usize,
    /// Weight cutoff of the Reeh-Schlieder experiment; defaults to `min(4, N − margin)`.
    #[serde(default)]
    pub weight_cutoff: Option<usize>,
}

fn default_margin() -> usize {
    3
}

fn default_suite() -> Suite {
    Suite::All
}

fn default_word_length() -> usize {
    4
}

/// Values given on the command line; each replaces the config file's.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub suite: Option<Suite>,
    pub model: Option<ModelName>,
    pub c: Option<String>,
    pub simple: bool,
    pub max_weight: Option<usize>,
    pub band: Option<usize>,
    pub margin: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    /// A config built from flags alone.
    pub fn from_flags(o: &Overrides) -> Result<Self, String> {
        let name = o.model.ok_or("no config file given and --model missing")?;
        Ok(RunConfig {
            model: ModelChoice { name, c: None, simple: false },
            max_weight: o.max_weight.ok_or("no config file given and --max-weight missing")?,
            band: o.band.unwrap_or(8),
            margin: default_margin(),
            tolerances: Tolerances::default(),
            suite: default_suite(),
            out: None,
            csv_out: None,
            seed: 0,
            word_length: default_word_length(),
            weight_cutoff: None,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(s) = o.suite {
            self.suite = s;
        }
        if let Some(m) = o.model {
            self.model.name = m;
        }
        if let Some(c) = &o.c {
            self.model.c = Some(c.clone());
        }
        if o.simple {
            self.model.simple = true;
        }
        if let Some(n) = o.max_weight {
            self.max_weight = n;
        }
        if let Some(b) = o.band {
            self.band = b;
        }
        if let Some(m) = o.margin {
            self.margin = m;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if let Some(p) = &o.out {
            self.out = Some(p.clone());
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.margin < 1 {
            return Err("margin must be at least 1".into());
        }
        if self.max_weight < self.margin {
            return Err(format!("max_weight {} is below margin {}", self.max_weight, self.margin));
        }
        if self.band < 1 {
            return Err("band must be at least 1".into());
        }
        let t = &self.tolerances;
        for (name, v) in [("float", t.float), ("covariance", t.covariance), ("rank", t.rank)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(format!("tolerance {name} must be positive, got {v}"));
            }
        }
        match (self.model.name, &self.model.c) {
            (ModelName::Virasoro, None) => return Err("virasoro needs a central charge c".into()),
            (ModelName::Heisenberg, Some(_)) => return Err("heisenberg takes no central charge".into()),
            (ModelName::Heisenberg, None) if self.model.simple => {
                return Err("the Heisenberg vacuum module is already simple".into())
            }
            _ => {}
        }
        self.central_charge()?;
        if let Some(w) = self.weight_cutoff {
            if w > self.window() {
                return Err(format!("weight_cutoff {w} exceeds the trusted window {}", self.window()));
            }
        }
        Ok(())
    }

    pub fn central_charge(&self) -> Result<Option<Rational>, String> {
        self.model
            .c
            .as_deref()
            .map(|s| parse_rational(s).ok_or_else(|| format!("central charge {s:?} is not a rational number")))
            .transpose()
    }

    pub fn window(&self) -> usize {
        self.max_weight - self.margin
    }

    pub fn weight_cutoff(&self) -> usize {
        self.weight_cutoff.unwrap_or(self.window().min(4))
    }

    pub fn build_model(&self) -> Result<Model, String> {
        let m = match self.model.name {
            ModelName::Heisenberg => Model::heisenberg(self.max_weight),
            ModelName::Virasoro => {
                let c = self.central_charge()?.expect("validated");
                Model::virasoro(&c, self.max_weight, self.model.simple)
            }
        };
        Ok(m.with_margin(self.margin))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> RunConfig {
        RunConfig::from_flags(&Overrides { model: Some(ModelName::Heisenberg), max_weight: Some(8), ..Default::default() })
            .unwrap()
    }

    #[test]
    fn margin_above_max_weight_is_rejected() {
        let mut c = base();
        c.max_weight = 2;
        c.margin = 3;
        assert!(c.validate().unwrap_err().contains("below margin"));
    }

    #[test]
    fn tolerances_must_be_positive() {
        let mut c = base();
        c.tolerances.float = 0.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn virasoro_needs_rational_c() {
        let mut c = base();
        c.model.name = ModelName::Virasoro;
        assert!(c.validate().is_err());
        c.model.c = Some("-22/5".into());
        assert!(c.validate().is_ok());
        c.model.c = Some("abc".into());
        assert!(c.validate().is_err());
    }

    #[test]
    fn json_round_trip() {
        let json = r#"{"model": {"name": "virasoro", "c": "-22/5"}, "max_weight": 4, "band": 4, "margin": 1, "suite": "gram"}"#;
        let c: RunConfig = serde_json::from_str(json).unwrap();
        assert_eq!(c.suite, Suite::Gram);
        assert_eq!(c.central_charge().unwrap(), Some(Rational::new((-22).into(), 5.into())));
        let back: RunConfig = serde_json::from_str(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(back, c);
        assert!(serde_json::from_str::<RunConfig>(r#"{"model": {"name": "heisenberg"}, "max_weight": 4, "band": 4, "colour": 1}"#).is_err());
    }
}
