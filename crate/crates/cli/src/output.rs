//! CSV tables and the remap document.

use std::fmt::Write;

use dgn_core::model::{strip_of_regularity, tail_profile, RemappedPortfolio, DEFAULT_GROUP_TOL};
use serde::Serialize;

use crate::input::{Metadata, RemappedBlock};

/// 17 significant digits, enough to round-trip any `f64`.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A CSV table with a fixed header. Cells never need quoting here.
pub struct Table {
    width: usize,
    text: String,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            width: header.len(),
            text: header.join(",") + "\n",
        }
    }

    pub fn row(&mut self, cells: &[String]) {
        debug_assert_eq!(cells.len(), self.width);
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn finish(self) -> String {
        self.text
    }
}

// JSON has no infinities, so unbounded ends become null
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Serialize)]
struct Strip {
    nu_minus: Option<f64>,
    nu_plus: Option<f64>,
}

#[derive(Serialize)]
struct Tail {
    regime: &'static str,
    v_inf: Option<f64>,
    v_sup: Option<f64>,
    m_bar: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    v0: Option<f64>,
}

#[derive(Serialize)]
struct Moments {
    mean: f64,
    variance: f64,
    mu3: f64,
    mu4: f64,
    skewness: Option<f64>,
    excess_kurtosis: Option<f64>,
}

#[derive(Serialize)]
struct RemapDocument<'a> {
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<&'a Metadata>,
    remapped: RemappedBlock,
    strip: Strip,
    tail: Tail,
    moments: Moments,
}

/// Pretty JSON that reads back in as a remapped portfolio file.
pub fn remap_document(p: &RemappedPortfolio, metadata: Option<&Metadata>) -> String {
    let s = strip_of_regularity(p);
    let tp = tail_profile(p, DEFAULT_GROUP_TOL);
    let m = p.moments();
    let doc = RemapDocument {
        metadata,
        remapped: RemappedBlock {
            theta: p.theta(),
            delta: p.delta().to_vec(),
            lambda: p.lambda().to_vec(),
        },
        strip: Strip {
            nu_minus: finite(s.nu_minus),
            nu_plus: finite(s.nu_plus),
        },
        tail: Tail {
            regime: tp.regime.as_str(),
            v_inf: finite(tp.v_inf),
            v_sup: finite(tp.v_sup),
            m_bar: tp.m_bar + 0.0, // no negative zero in the document
            v0: tp.v0,
        },
        moments: Moments {
            mean: m.mu1,
            variance: m.mu2,
            mu3: m.mu3,
            mu4: m.mu4,
            skewness: m.skewness,
            excess_kurtosis: m.excess_kurtosis,
        },
    };
    serde_json::to_string_pretty(&doc).expect("plain data serializes") + "\n"
}
