//! Structure decomposition of the canonical controller into a global
//! multi-value relay term and a local PD term:
//!
//! ```text
//! K_u u*(e*, Δe*) = u_G(i, j) + u_L(e*, Δe*)
//! u_G = -K_u (i + j + 1) / (M - 1)
//! u_L = K_p (e* - mid_i) + K_D (Δe* - mid_j)
//! K_p = -K_u / ((M - 1) D_e),  K_D = -K_u / ((M - 1) D_Δe)
//! ```
//!
//! where `(i, j)` is the active cell, `mid` the cell midpoints and `D` the
//! (possibly sampled) flank denominators. Here `K_u` is the effective output
//! gain `K_u * H`.

use serde::Serialize;

use crate::controller::{infer, sample_denominator, ControllerConfig, Mode, Partition, RuleBase, Shape};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Relay level of cell `(i, j)`.
pub fn global_term(i: i32, j: i32, ku: f64, m: i32) -> f64 {
    -ku * (i + j + 1) as f64 / (m - 1) as f64
}

fn denominators(i: i32, j: i32, pe: &Partition, pde: &Partition, mode: Mode, rng: &mut RandomSource) -> (f64, f64) {
    let (a0, a1) = (pe.center(i), pe.center(i + 1));
    let (b0, b1) = (pde.center(j), pde.center(j + 1));
    match mode {
        Mode::Deterministic => (a1 - a0, b1 - b0),
        Mode::Stochastic => (
            sample_denominator(a0, a1, pe.he, rng),
            sample_denominator(b0, b1, pde.he, rng),
        ),
    }
}

/// Local PD gains `(K_p, K_D)` of cell `(i, j)`; one sampled realization in
/// stochastic mode.
#[allow(clippy::too_many_arguments)]
pub fn local_gains(
    i: i32,
    j: i32,
    pe: &Partition,
    pde: &Partition,
    ku: f64,
    m: i32,
    mode: Mode,
    rng: &mut RandomSource,
) -> (f64, f64) {
    let (de, dde) = denominators(i, j, pe, pde, mode, rng);
    let scale = -ku / (m - 1) as f64;
    (scale / de, scale / dde)
}

/// Local PD term in sum form.
#[allow(clippy::too_many_arguments)]
pub fn local_term(
    e: f64,
    de: f64,
    i: i32,
    j: i32,
    pe: &Partition,
    pde: &Partition,
    ku: f64,
    m: i32,
    mode: Mode,
    rng: &mut RandomSource,
) -> f64 {
    let (kp, kd) = local_gains(i, j, pe, pde, ku, m, mode, rng);
    let mid_i = 0.5 * (pe.center(i) + pe.center(i + 1));
    let mid_j = 0.5 * (pde.center(j) + pde.center(j + 1));
    kp * (e - mid_i) + kd * (de - mid_j)
}

/// The product form `-K_u/(M-1) * [(2e* - λ_i - λ_{i+1})/D_e * (2Δe* - λ_j - λ_{j+1})/D_Δe]`
/// (deterministic denominators). Kept only to report that it does not
/// satisfy the decomposition identity.
#[allow(clippy::too_many_arguments)]
pub fn product_form_local_term(e: f64, de: f64, i: i32, j: i32, pe: &Partition, pde: &Partition, ku: f64, m: i32) -> f64 {
    let (a0, a1) = (pe.center(i), pe.center(i + 1));
    let (b0, b1) = (pde.center(j), pde.center(j + 1));
    -ku / (m - 1) as f64 * ((2.0 * e - a0 - a1) / (a1 - a0)) * ((2.0 * de - b0 - b1) / (b1 - b0))
}

/// Per-cell decomposition record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionReport {
    pub i: i32,
    pub j: i32,
    pub u_g: f64,
    pub k_p: f64,
    pub k_d: f64,
    /// Largest `|K_u u* - (u_G + u_L)|` over the grid points in this cell.
    pub residual: f64,
    /// Largest residual of the product form in this cell.
    pub product_form_residual: f64,
    pub samples: usize,
}

/// Grid certification summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem1Summary {
    pub j: i32,
    pub ku: f64,
    pub h: f64,
    pub grid_n: usize,
    pub points: usize,
    pub max_residual: f64,
    /// Largest gap between the closed-form `u_L` and the complement
    /// `K_u u* - u_G`.
    pub max_complement_gap: f64,
    pub max_product_form_residual: f64,
    pub certified: bool,
    pub cells: Vec<DecompositionReport>,
}

/// Tolerance at which the identity counts as certified.
pub const CERTIFICATION_TOLERANCE: f64 = 1e-12;

fn require_certifiable(cfg: &ControllerConfig) -> Result<()> {
    cfg.validate()?;
    if cfg.mode != Mode::Deterministic {
        return Err(Error::invalid(
            "mode",
            "certification is deterministic; set mode = \"deterministic\"",
        ));
    }
    if cfg.shape != Shape::Triangle {
        return Err(Error::invalid("shape", "decomposition applies to the triangle controller only"));
    }
    if cfg.rules != RuleBase::canonical(cfg.j()) {
        return Err(Error::invalid("rules", "decomposition requires the canonical rule base"));
    }
    Ok(())
}

/// Compares the controller with `u_G + u_L` on a `grid_n x grid_n` lattice
/// covering both universes.
pub fn verify_theorem1(cfg: &ControllerConfig, grid_n: usize) -> Result<Theorem1Summary> {
    require_certifiable(cfg)?;
    if grid_n < 2 {
        return Err(Error::invalid("grid", "need at least 2 points per axis"));
    }
    let (pe, pde) = (&cfg.e_partition, &cfg.de_partition);
    let big_j = cfg.j();
    let m = cfg.cloud_count();
    let ku = cfg.output_gain();
    // never consumed in deterministic mode
    let mut rng = RandomSource::new(0);

    let side = (2 * big_j) as usize;
    let mut cells: Vec<DecompositionReport> = Vec::with_capacity(side * side);
    for i in -big_j..big_j {
        for j in -big_j..big_j {
            let (k_p, k_d) = local_gains(i, j, pe, pde, ku, m, Mode::Deterministic, &mut rng);
            cells.push(DecompositionReport {
                i,
                j,
                u_g: global_term(i, j, ku, m),
                k_p,
                k_d,
                residual: 0.0,
                product_form_residual: 0.0,
                samples: 0,
            });
        }
    }

    let mut max_residual = 0.0f64;
    let mut max_gap = 0.0f64;
    let mut max_product = 0.0f64;
    let at = |lo: f64, hi: f64, s: usize| lo + (hi - lo) * s as f64 / (grid_n - 1) as f64;
    for a in 0..grid_n {
        let e = at(pe.lo, pe.hi, a);
        for b in 0..grid_n {
            let de = at(pde.lo, pde.hi, b);
            let row = infer(e, de, cfg, &mut rng)?;
            let (i, j) = (row.i, row.j);
            let u = cfg.ku * row.u_star;
            let u_g = global_term(i, j, ku, m);
            let u_l = local_term(e, de, i, j, pe, pde, ku, m, Mode::Deterministic, &mut rng);
            let residual = (u - (u_g + u_l)).abs();
            let gap = ((u - u_g) - u_l).abs();
            let product = (u - (u_g + product_form_local_term(e, de, i, j, pe, pde, ku, m))).abs();

            let cell = &mut cells[((i + big_j) as usize) * side + (j + big_j) as usize];
            cell.residual = cell.residual.max(residual);
            cell.product_form_residual = cell.product_form_residual.max(product);
            cell.samples += 1;

            max_residual = max_residual.max(residual);
            max_gap = max_gap.max(gap);
            max_product = max_product.max(product);
        }
    }

    Ok(Theorem1Summary {
        j: big_j,
        ku: cfg.ku,
        h: cfg.consequents.h,
        grid_n,
        points: grid_n * grid_n,
        max_residual,
        max_complement_gap: max_gap,
        max_product_form_residual: max_product,
        certified: max_residual <= CERTIFICATION_TOLERANCE,
        cells,
    })
}

/// Relay levels `u_G(i, j)` for every cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelayTable {
    pub j: i32,
    /// `levels[i + J][j + J]` for `i, j` in `-J..J`.
    pub levels: Vec<Vec<f64>>,
}

impl RelayTable {
    pub fn cell_count(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }

    pub fn level(&self, i: i32, j: i32) -> f64 {
        self.levels[(i + self.j) as usize][(j + self.j) as usize]
    }

    /// `i,j,u_g` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("i,j,u_g\n");
        for i in -self.j..self.j {
            for j in -self.j..self.j {
                s.push_str(&format!("{i},{j},{:?}\n", self.level(i, j)));
            }
        }
        s
    }
}

pub fn relay_table(cfg: &ControllerConfig) -> Result<RelayTable> {
    require_certifiable(cfg)?;
    let big_j = cfg.j();
    let (ku, m) = (cfg.output_gain(), cfg.cloud_count());
    let levels = (-big_j..big_j)
        .map(|i| (-big_j..big_j).map(|j| global_term(i, j, ku, m)).collect())
        .collect();
    Ok(RelayTable { j: big_j, levels })
}
