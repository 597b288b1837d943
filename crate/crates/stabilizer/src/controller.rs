//! Assembly of the error-feedback controller blocks around a canonical
//! realization, plus flat-file persistence for the assembled signals.

use std::io::Write as IoWrite;

use internal_model::CanonicalRealization;
use ltv_core::{Grid, MatrixSignal};
use nalgebra::DMatrix;

use crate::{HighGainParams, StabilizerError};

/// The assembled controller
///
/// ```text
/// d/dt ξ = F_c(t) ξ + G_c(t) e,    u = H_c(t) ξ,
/// ```
///
/// partitioned as ξ = (ξ1, ξ2) with ξ1 the r fast observer states and ξ2
/// the l internal-model states.
#[derive(Clone, Debug)]
pub struct Controller {
    pub f_c: MatrixSignal,
    pub g_c: MatrixSignal,
    pub h_c: MatrixSignal,
    /// Fast-block dimension (relative degree).
    pub r: usize,
    /// Internal-model dimension.
    pub l: usize,
    pub t0: f64,
}

impl Controller {
    pub fn nu(&self) -> usize {
        self.r + self.l
    }

    /// One-line JSON description of the partition.
    pub fn manifest_json(&self) -> String {
        format!(
            "{{\"r\":{},\"l\":{},\"nu\":{},\"t0\":{}}}",
            self.r,
            self.l,
            self.nu(),
            self.t0
        )
    }

    /// Write `t, Fc_11.., Gc_1.., Hc_1..` rows sampled on
    /// `[t0, t0 + horizon]`.  Values use shortest round-trip formatting,
    /// so a read-back reproduces the samples bit for bit.
    pub fn write_csv<W: IoWrite>(
        &self,
        horizon: f64,
        step: f64,
        w: &mut W,
    ) -> std::io::Result<()> {
        let nu = self.nu();
        let mut header = String::from("t");
        for i in 1..=nu {
            for j in 1..=nu {
                header.push_str(&format!(",Fc_{i}{j}"));
            }
        }
        for i in 1..=nu {
            header.push_str(&format!(",Gc_{i}"));
        }
        for j in 1..=nu {
            header.push_str(&format!(",Hc_{j}"));
        }
        writeln!(w, "{header}")?;
        let len = (horizon / step).round() as usize + 1;
        for k in 0..len {
            let t = self.t0 + k as f64 * step;
            let mut line = format!("{t}");
            let fv = self.f_c.eval(t);
            for i in 0..nu {
                for j in 0..nu {
                    line.push_str(&format!(",{}", fv[(i, j)]));
                }
            }
            let gv = self.g_c.eval(t);
            for i in 0..nu {
                line.push_str(&format!(",{}", gv[(i, 0)]));
            }
            let hv = self.h_c.eval(t);
            for j in 0..nu {
                line.push_str(&format!(",{}", hv[(0, j)]));
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Rebuild a controller from [`Controller::write_csv`] output.  The
/// partition (r, l) is not stored in the CSV and must be supplied.
pub fn read_controller_csv(text: &str, r: usize, l: usize) -> Result<Controller, StabilizerError> {
    let nu = r + l;
    let want = 1 + nu * nu + nu + nu;
    let mut times = Vec::new();
    let mut f_rows = Vec::new();
    let mut g_rows = Vec::new();
    let mut h_rows = Vec::new();
    for (idx, line) in text.lines().enumerate().skip(1) {
        let cells: Result<Vec<f64>, _> = line.split(',').map(str::parse::<f64>).collect();
        let cells = cells.map_err(|e| StabilizerError::MalformedCsv {
            line: idx + 1,
            why: e.to_string(),
        })?;
        if cells.len() != want {
            return Err(StabilizerError::MalformedCsv {
                line: idx + 1,
                why: format!("{} columns, expected {want}", cells.len()),
            });
        }
        times.push(cells[0]);
        f_rows.push(DMatrix::from_row_slice(nu, nu, &cells[1..1 + nu * nu]));
        g_rows.push(DMatrix::from_column_slice(nu, 1, &cells[1 + nu * nu..1 + nu * nu + nu]));
        h_rows.push(DMatrix::from_row_slice(1, nu, &cells[1 + nu * nu + nu..]));
    }
    if times.len() < 2 {
        return Err(StabilizerError::MalformedCsv {
            line: times.len() + 1,
            why: "need at least two sample rows".into(),
        });
    }
    let (t0, step) = (times[0], times[1] - times[0]);
    Ok(Controller {
        f_c: MatrixSignal::from_grid(Grid::new(t0, step, f_rows)),
        g_c: MatrixSignal::from_grid(Grid::new(t0, step, g_rows)),
        h_c: MatrixSignal::from_grid(Grid::new(t0, step, h_rows)),
        r,
        l,
        t0,
    })
}

/// Assemble the controller blocks around a canonical realization.
///
/// The fast block is the observer-form pair
///
/// ```text
/// M_g = [−g·d_{r−1} | I_{r−1}]   L_g = [g·d_{r−1}; …; g·d_0],
///       [    ⋮      |        ]
///       [−g·d_0     | 0      ]
/// ```
///
/// the internal-model block is the composite generator
/// `F_im + G_im·H_im`, and the two are coupled through the row
/// `(−K 1)` scaled by `−k·sign(b)`.
pub fn build_controller(
    real: &CanonicalRealization,
    params: &HighGainParams,
) -> Result<Controller, StabilizerError> {
    params.validate()?;
    if real.reconstruction_defect > 1e-6 {
        return Err(StabilizerError::WeakRealization { defect: real.reconstruction_defect });
    }
    let r = params.r();
    let l = real.nu;
    if real.h_im.cols() != l || real.g_im.rows() != l {
        return Err(StabilizerError::DimensionMismatch {
            what: format!(
                "realization blocks are {}x{} / {}x{}, expected 1x{l} / {l}x1",
                real.h_im.rows(),
                real.h_im.cols(),
                real.g_im.rows(),
                real.g_im.cols()
            ),
        });
    }

    let g = params.g;
    let mut m_g = DMatrix::zeros(r, r);
    let mut l_g = DMatrix::zeros(r, 1);
    for i in 0..r {
        m_g[(i, 0)] = -g * params.d[r - 1 - i];
        l_g[(i, 0)] = g * params.d[r - 1 - i];
        if i + 1 < r {
            m_g[(i, i + 1)] = 1.0;
        }
    }

    // The coupling row (−K 1), scaled by −k·sign(b).
    let mut row = DMatrix::zeros(1, r);
    for j in 0..r - 1 {
        row[(0, j)] = -params.brunovsky[(0, j)];
    }
    row[(0, r - 1)] = 1.0;
    let scaled = (-params.k * params.sign_b) * row;
    let scaled_sig = MatrixSignal::constant(scaled.clone());

    let coupling = real.g_im.clone() * scaled_sig.clone();
    let composite = real.f_im.clone() + real.g_im.clone() * real.h_im.clone();

    let f_c = MatrixSignal::block(vec![
        vec![MatrixSignal::constant(m_g), MatrixSignal::zeros(r, l)],
        vec![coupling, composite],
    ]);
    let g_c = MatrixSignal::block(vec![
        vec![MatrixSignal::constant(l_g)],
        vec![MatrixSignal::zeros(l, 1)],
    ]);
    let h_c = MatrixSignal::block(vec![vec![scaled_sig, real.h_im.clone()]]);

    Ok(Controller { f_c, g_c, h_c, r, l, t0: real.t0 })
}
