//! End-to-end runners shared by the command line and the test suites.

use crate::direct::{DirectConfig, DirectSolver, SamplingConfig, ScatteringData};
use crate::error::Result;
use crate::glm::{assemble, GlmConfig, GlmKernel, KernelGrid};
use crate::marchenko::{
    combined_potential, recover_potential, side_grid, verify_two_sided_consistency_excluding, ConsistencyReport, MarchenkoConfig,
    TransformKernel,
};
use crate::potential::{Potential, Side};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseConfig {
    pub x_overlap: f64,
    pub window: (f64, f64),
    pub points: usize,
    pub consistency_tol: f64,
    /// Half-width of the band around input jumps left out of the
    /// consistency comparison.
    pub jump_exclusion: f64,
    pub glm: GlmConfig,
    pub marchenko: MarchenkoConfig,
}

impl Default for InverseConfig {
    fn default() -> Self {
        Self {
            x_overlap: 3.0,
            window: (-10.0, 10.0),
            points: 801,
            consistency_tol: 1e-3,
            jump_exclusion: 0.5,
            glm: GlmConfig::default(),
            marchenko: MarchenkoConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub kernel_plus: GlmKernel,
    pub kernel_minus: GlmKernel,
    pub plus: TransformKernel,
    pub minus: TransformKernel,
    pub consistency: ConsistencyReport,
    /// (x, q(x)) on the reconstruction window.
    pub potential: Vec<(f64, f64)>,
}

pub fn kernels(data: &ScatteringData, cfg: &InverseConfig) -> Result<(GlmKernel, GlmKernel)> {
    let n_q = cfg.marchenko.nodes();
    let (p, m) = rayon::join(
        || assemble(data, Side::Plus, KernelGrid::for_side(Side::Plus, data.x_inf, cfg.x_overlap, n_q), &cfg.glm),
        || assemble(data, Side::Minus, KernelGrid::for_side(Side::Minus, data.x_inf, cfg.x_overlap, n_q), &cfg.glm),
    );
    Ok((p?, m?))
}

/// GLM assembly and Marchenko recovery on both sides.
pub fn reconstruct(data: &ScatteringData, cfg: &InverseConfig) -> Result<Reconstruction> {
    reconstruct_with_jumps(data, cfg, &[])
}

/// As [`reconstruct`], with known jump locations of the source potential
/// excluded from the consistency comparison.
pub fn reconstruct_with_jumps(data: &ScatteringData, cfg: &InverseConfig, jumps: &[f64]) -> Result<Reconstruction> {
    reconstruct_from_kernels(data, kernels(data, cfg)?, cfg, jumps)
}

/// Marchenko recovery from kernels that are already assembled.
pub fn reconstruct_from_kernels(
    data: &ScatteringData,
    (kernel_plus, kernel_minus): (GlmKernel, GlmKernel),
    cfg: &InverseConfig,
    jumps: &[f64],
) -> Result<Reconstruction> {
    let (lo, hi) = cfg.window;
    let gp = side_grid(Side::Plus, lo, hi, cfg.points, cfg.x_overlap);
    let gm = side_grid(Side::Minus, lo, hi, cfg.points, cfg.x_overlap);
    let plus = recover_potential(&kernel_plus, &gp, &cfg.marchenko)?;
    let minus = recover_potential(&kernel_minus, &gm, &cfg.marchenko)?;
    let consistency = verify_two_sided_consistency_excluding(
        &plus,
        &minus,
        data.c_plus,
        data.c_minus,
        cfg.x_overlap,
        cfg.consistency_tol,
        jumps,
        cfg.jump_exclusion,
    );
    let potential = combined_potential(&plus, &minus, data.c_plus, data.c_minus);
    Ok(Reconstruction { kernel_plus, kernel_minus, plus, minus, consistency, potential })
}

/// Direct scattering for a potential with the given settings.
pub fn direct(potential: &Potential, cfg: DirectConfig, sampling: &SamplingConfig) -> Result<ScatteringData> {
    DirectSolver::new(potential, cfg)?.scattering_data(sampling)
}

/// Potential → data → potential; returns the data with the reconstruction.
pub fn roundtrip(
    potential: &Potential,
    direct_cfg: DirectConfig,
    sampling: &SamplingConfig,
    cfg: &InverseConfig,
) -> Result<(ScatteringData, Reconstruction)> {
    let data = direct(potential, direct_cfg, sampling)?;
    let rec = reconstruct_with_jumps(&data, cfg, &potential.jump_points())?;
    Ok((data, rec))
}

/// sup |q_rec − q| over window points at distance ≥ `exclusion` from every
/// breakpoint of the input.
pub fn sup_error(potential: &Potential, rec: &[(f64, f64)], exclusion: f64) -> f64 {
    let bps = potential.breakpoints();
    rec.iter()
        .filter(|(x, _)| bps.iter().all(|b| (x - b).abs() >= exclusion))
        .fold(0.0, |m, (x, q)| m.max((q - potential.value(*x)).abs()))
}
