//! Flat-file persistence: a small JSON manifest describing a model or a
//! realization, plus CSV grids for the time-varying rows.  Numbers in the
//! CSV are printed with Rust's shortest round-trip formatting, so reading
//! them back reproduces the samples bit for bit.

use std::io::Write as IoWrite;

use crate::canonical::CanonicalRealization;
use crate::model::{InternalModel, Provenance, SigmaInit};
use crate::ApproxIMReport;

fn provenance_tag(p: &Provenance) -> String {
    match p {
        Provenance::Nominal => "nominal".into(),
        Provenance::InteractionRobust => "interaction_robust".into(),
        Provenance::PlantApprox { k_b, k_eta } => {
            format!("plant_series(k_b={k_b},k_eta={k_eta})")
        }
        Provenance::Reduced => "reduced".into(),
        Provenance::Shifted => "shifted".into(),
        Provenance::Canonical => "canonical".into(),
    }
}

fn sigma_tag(s: &Option<SigmaInit>) -> String {
    fn tag(s: &SigmaInit) -> String {
        match s {
            SigmaInit::BlockMonomials { monomials, rho } => {
                format!("block_monomials({} blocks x {rho})", monomials.len())
            }
            SigmaInit::Projected { v, inner } => {
                format!("projected({}x{}; {})", v.nrows(), v.ncols(), tag(inner))
            }
            SigmaInit::Transformed { inner, .. } => format!("transformed({})", tag(inner)),
        }
    }
    match s {
        Some(s) => tag(s),
        None => "none".into(),
    }
}

impl InternalModel {
    /// One-line JSON description of the pair: dimensions, construction,
    /// and the shape of the initial-seed map.
    pub fn manifest_json(&self) -> String {
        format!(
            "{{\"nu\":{},\"t0\":{},\"provenance\":\"{}\",\"sigma\":\"{}\"}}",
            self.nu,
            self.t0,
            provenance_tag(&self.provenance),
            sigma_tag(&self.sigma),
        )
    }

    /// Write `t, H_1..H_nu` rows sampled on `[t0, t0 + horizon]`.
    pub fn write_h_csv<W: IoWrite>(
        &self,
        horizon: f64,
        step: f64,
        w: &mut W,
    ) -> std::io::Result<()> {
        let mut header = String::from("t");
        for j in 1..=self.nu {
            header.push_str(&format!(",H_{j}"));
        }
        writeln!(w, "{header}")?;
        let len = (horizon / step).round() as usize + 1;
        for k in 0..len {
            let t = self.t0 + k as f64 * step;
            let h = self.h.eval(t);
            let mut line = format!("{t}");
            for j in 0..self.nu {
                line.push_str(&format!(",{}", h[(0, j)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

impl CanonicalRealization {
    /// One-line JSON description of the realization and its diagnostics.
    pub fn manifest_json(&self) -> String {
        format!(
            concat!(
                "{{\"nu\":{},\"alpha\":{},\"t0\":{},\"cond_max\":{:e},",
                "\"uco_margin\":{:e},\"reconstruction_defect\":{:e}}}"
            ),
            self.nu, self.alpha, self.t0, self.cond_max, self.uco_margin,
            self.reconstruction_defect,
        )
    }

    /// Write `t, Him_1..Him_nu, L_11..L_nunu` rows on the synthesis grid,
    /// down-sampled by 10 for persistence.
    pub fn write_grids_csv<W: IoWrite>(&self, w: &mut W) -> std::io::Result<()> {
        let nu = self.nu;
        let mut header = String::from("t");
        for j in 1..=nu {
            header.push_str(&format!(",Him_{j}"));
        }
        for i in 1..=nu {
            for j in 1..=nu {
                header.push_str(&format!(",L_{i}{j}"));
            }
        }
        writeln!(w, "{header}")?;
        let l = self.l.downsample(10);
        for k in 0..l.len() {
            let t = l.node_time(k);
            let mut line = format!("{t}");
            let h = self.h_im.eval(t);
            for j in 0..nu {
                line.push_str(&format!(",{}", h[(0, j)]));
            }
            let lv = l.node(k);
            for i in 0..nu {
                for j in 0..nu {
                    line.push_str(&format!(",{}", lv[(i, j)]));
                }
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

impl ApproxIMReport {
    /// One-line JSON rendering of the truncation diagnostics and bound.
    pub fn manifest_json(&self) -> String {
        let labels: Vec<String> = self.labels.iter().map(|l| format!("\"{l}\"")).collect();
        format!(
            concat!(
                "{{\"k_b\":{},\"k_eta\":{},\"n_b\":{},\"n_eta\":{},",
                "\"phi1\":{},\"phi2\":{},\"phi_b\":{},\"phi_sup\":{},",
                "\"g1\":{:e},\"g2\":{:e},\"bound_r\":{:e},",
                "\"term_count\":{},\"dropped\":{},\"labels\":[{}]}}"
            ),
            self.k_b,
            self.k_eta,
            self.n_b,
            self.n_eta,
            self.phi1,
            self.phi2,
            self.phi_b,
            self.phi_sup,
            self.g1,
            self.g2,
            self.bound_r,
            self.term_count,
            self.dropped,
            labels.join(","),
        )
    }
}
