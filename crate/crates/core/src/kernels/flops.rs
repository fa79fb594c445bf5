//! Closed-form floating-point operation counts (base-2 logarithms).
//!
//! * proposed: `(k+1) N log N + (6N-3) log(2N-1) + (2N-1)`
//! * time domain: `L M² + N M² + (2N-1) log(2N-1)`
//! * frequency domain: `M log M + L M² + N M²`

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Proposed,
    TimeDomain,
    FreqDomain,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Proposed, Method::TimeDomain, Method::FreqDomain];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Proposed => "proposed",
            Method::TimeDomain => "time_domain",
            Method::FreqDomain => "freq_domain",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposed" => Ok(Method::Proposed),
            "time_domain" => Ok(Method::TimeDomain),
            "freq_domain" => Ok(Method::FreqDomain),
            other => Err(Error::Parse(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlopReport {
    pub method: Method,
    pub n: usize,
    pub m: usize,
    pub l_snapshots: usize,
    pub sparsity_k: usize,
    pub total_flops: f64,
}

impl FlopReport {
    pub const CSV_HEADER: &'static str = "method,n,m,l_snapshots,sparsity_k,total_flops";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{:.6e}",
            self.method, self.n, self.m, self.l_snapshots, self.sparsity_k, self.total_flops
        )
    }
}

/// Operation count for `method`. Arguments a formula does not use are
/// recorded but ignored.
pub fn flops(method: Method, n: usize, m: usize, l_snapshots: usize, sparsity_k: usize) -> Result<FlopReport> {
    if n == 0 || m == 0 || l_snapshots == 0 || sparsity_k == 0 {
        return Err(Error::InvalidConfig("flop counts need positive sizes".into()));
    }
    let nf = n as f64;
    let mf = m as f64;
    let lf = l_snapshots as f64;
    let kf = sparsity_k as f64;
    let two_n = 2.0 * nf - 1.0;
    let total_flops = match method {
        Method::Proposed => (kf + 1.0) * nf * nf.log2() + (6.0 * nf - 3.0) * two_n.log2() + two_n,
        Method::TimeDomain => lf * mf * mf + nf * mf * mf + two_n * two_n.log2(),
        Method::FreqDomain => mf * mf.log2() + lf * mf * mf + nf * mf * mf,
    };
    Ok(FlopReport { method, n, m, l_snapshots, sparsity_k, total_flops })
}
