use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Inapplicable,
    Error,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Inapplicable => "inapplicable",
            Status::Error => "error",
        })
    }
}

/// Running maximum of a residual together with the sample that produced it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Worst {
    pub residual: f64,
    pub sample: Option<usize>,
}

impl Worst {
    pub fn update(&mut self, residual: f64, sample: usize) {
        let r = if residual.is_nan() { f64::INFINITY } else { residual };
        if self.sample.is_none() || r > self.residual {
            self.residual = r;
            self.sample = Some(sample);
        }
    }
}
