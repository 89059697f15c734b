use serde::{Deserialize, Serialize};

/// Size limits for the brute-force routines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Caps {
    /// optimal partition by subset DP
    pub partition: usize,
    /// exact expectation over all orders
    pub exact: usize,
    /// maximum weight matching by subset DP
    pub mwm: usize,
    /// |I| for the star probability calculators
    pub star: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps { partition: 12, exact: 8, mwm: 20, star: 8 }
    }
}

impl Caps {
    /// Names of caps that differ from the defaults, for override warnings.
    pub fn overridden(&self) -> Vec<&'static str> {
        let d = Caps::default();
        let mut out = Vec::new();
        if self.partition != d.partition {
            out.push("partition");
        }
        if self.exact != d.exact {
            out.push("exact");
        }
        if self.mwm != d.mwm {
            out.push("mwm");
        }
        if self.star != d.star {
            out.push("star");
        }
        out
    }
}
