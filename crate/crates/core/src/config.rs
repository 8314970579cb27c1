//! Simulation configuration, read from JSON.

use serde::{Deserialize, Serialize};

use crate::channel::CorrelationSpec;
use crate::error::{Error, Result};
use crate::signalset::SystemConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    SimoMbm,
    MimoMbm,
    SmMbm,
    GsmMbm,
    Mimo,
    Sm,
    Gsm,
    MapselMi,
    MapselEd,
    PccrNr1,
    PccrRx1,
    PccrRx2,
    TcmGsmMbm,
}

impl Scheme {
    pub const ALL: [Scheme; 13] = [
        Scheme::SimoMbm,
        Scheme::MimoMbm,
        Scheme::SmMbm,
        Scheme::GsmMbm,
        Scheme::Mimo,
        Scheme::Sm,
        Scheme::Gsm,
        Scheme::MapselMi,
        Scheme::MapselEd,
        Scheme::PccrNr1,
        Scheme::PccrRx1,
        Scheme::PccrRx2,
        Scheme::TcmGsmMbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SimoMbm => "simo-mbm",
            Scheme::MimoMbm => "mimo-mbm",
            Scheme::SmMbm => "sm-mbm",
            Scheme::GsmMbm => "gsm-mbm",
            Scheme::Mimo => "mimo",
            Scheme::Sm => "sm",
            Scheme::Gsm => "gsm",
            Scheme::MapselMi => "mapsel-mi",
            Scheme::MapselEd => "mapsel-ed",
            Scheme::PccrNr1 => "pccr-nr1",
            Scheme::PccrRx1 => "pccr-rx1",
            Scheme::PccrRx2 => "pccr-rx2",
            Scheme::TcmGsmMbm => "tcm-gsm-mbm",
        }
    }

    pub fn is_mapsel(self) -> bool {
        matches!(self, Scheme::MapselMi | Scheme::MapselEd)
    }

    pub fn is_pccr(self) -> bool {
        matches!(self, Scheme::PccrNr1 | Scheme::PccrRx1 | Scheme::PccrRx2)
    }

    /// Uncoded and open-loop: the union bound applies.
    pub fn has_union_bound(self) -> bool {
        !self.is_mapsel() && !self.is_pccr() && self != Scheme::TcmGsmMbm
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Phase feedback quality for PC-CR: `"perfect"` or `{"bits": B}`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Feedback {
    #[default]
    Perfect,
    Bits(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct StopRule {
    pub min_bit_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        Self { min_bit_errors: 200, max_trials: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub system: SystemConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correlation: Option<CorrelationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub feedback: Option<Feedback>,
    pub snr_db: Vec<f64>,
    #[serde(default)]
    pub stop: StopRule,
    #[serde(default)]
    pub master_seed: u64,
}

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}

impl SimConfig {
    pub fn new(scheme: Scheme, system: SystemConfig, snr_db: Vec<f64>) -> Self {
        Self { scheme, system, correlation: None, feedback: None, snr_db, stop: StopRule::default(), master_seed: 0 }
    }

    pub fn with_correlation(mut self, c: CorrelationSpec) -> Self {
        self.correlation = Some(c);
        self
    }

    pub fn with_feedback(mut self, f: Feedback) -> Self {
        self.feedback = Some(f);
        self
    }

    pub fn with_stop(mut self, min_bit_errors: u64, max_trials: u64) -> Self {
        self.stop = StopRule { min_bit_errors, max_trials };
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn correlation(&self) -> CorrelationSpec {
        self.correlation.unwrap_or(CorrelationSpec::NONE)
    }

    pub fn feedback(&self) -> Feedback {
        self.feedback.unwrap_or_default()
    }

    /// Checks the scheme-specific shape constraints up front.
    pub fn validate(&self) -> Result<()> {
        let s = &self.system;
        s.validate()?;
        self.correlation().validate()?;
        if self.snr_db.is_empty() {
            return Err(invalid("snr_db is empty"));
        }
        if self.snr_db.iter().any(|x| !x.is_finite()) {
            return Err(invalid("snr_db must be finite"));
        }
        if self.stop.max_trials == 0 {
            return Err(invalid("stop.max_trials must be positive"));
        }
        let name = self.scheme.name();
        if !self.scheme.is_mapsel() && s.big_m_rf() != s.m_rf {
            return Err(invalid(format!("{name} uses every mirror: M_rf must equal m_rf")));
        }
        if self.feedback.is_some() && !self.scheme.is_pccr() {
            return Err(invalid(format!("{name} takes no phase feedback")));
        }
        if let Feedback::Bits(0) = self.feedback() {
            return Err(invalid("feedback bits must be at least 1"));
        }
        let mbm = s.m_rf >= 1;
        match self.scheme {
            Scheme::SimoMbm if !(s.n_tu == 1 && s.n_rf == 1 && mbm) => Err(invalid("simo-mbm needs n_tu = n_rf = 1, m_rf >= 1")),
            Scheme::MimoMbm if !(s.n_rf == s.n_tu && mbm) => Err(invalid("mimo-mbm needs n_rf = n_tu, m_rf >= 1")),
            Scheme::SmMbm if !(s.n_rf == 1 && mbm) => Err(invalid("sm-mbm needs n_rf = 1, m_rf >= 1")),
            Scheme::GsmMbm if !mbm => Err(invalid("gsm-mbm needs m_rf >= 1")),
            Scheme::Mimo if !(s.n_rf == s.n_tu && s.m_rf == 0) => Err(invalid("mimo needs n_rf = n_tu, m_rf = 0")),
            Scheme::Sm if !(s.n_rf == 1 && s.m_rf == 0) => Err(invalid("sm needs n_rf = 1, m_rf = 0")),
            Scheme::Gsm if s.m_rf != 0 => Err(invalid("gsm needs m_rf = 0")),
            Scheme::MapselMi | Scheme::MapselEd if !mbm => Err(invalid("mapsel needs m_rf >= 1")),
            Scheme::PccrNr1 | Scheme::PccrRx1 | Scheme::PccrRx2 if !s.alphabet.is_tone() => Err(Error::NonToneAlphabet),
            Scheme::PccrNr1 | Scheme::PccrRx1 | Scheme::PccrRx2 if !(s.n_rf == s.n_tu && mbm) => {
                Err(invalid("pc-cr needs n_rf = n_tu, m_rf >= 1"))
            }
            Scheme::PccrNr1 if s.n_r != 1 => Err(invalid("pccr-nr1 needs n_r = 1")),
            Scheme::TcmGsmMbm if s.rate() != crate::tcm::OUTPUTS => {
                Err(invalid(format!("tcm-gsm-mbm needs {} bits per channel use", crate::tcm::OUTPUTS)))
            }
            _ => Ok(()),
        }
    }
}
