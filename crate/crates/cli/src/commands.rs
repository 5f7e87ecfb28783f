//! The five data-producing commands. Each returns a human-readable report
//! for stdout and writes machine-readable CSV artifacts into the configured
//! output directory; identical config and seed always reproduce identical
//! bytes.

use std::path::PathBuf;

use rayon::prelude::*;

use skyrmion_core::channels::NoiseParams;
use skyrmion_core::correlations::{
    concurrence, discord_bell_diagonal, discord_numeric, fidelity_flip, fidelity_pure, purity,
};
use skyrmion_core::states::{nonlocal_skyrmion, BellLabel};
use skyrmion_core::tensor::{DensityOperator, PauliAxis};
use skyrmion_core::texture::{
    analyze_texture, skyrmion_number_fd, stokes_nonlocal, write_stokes_csv, StokesField,
    TextureAnalysis, TransverseGrid, DEGENERACY_EPSILON,
};
use skyrmion_core::tomography::{
    counts_to_csv, density_to_csv, mle_refine, monte_carlo_uncertainty, project_physical,
    reconstruct_linear, simulate_counts, CountRecord,
};
use skyrmion_core::transfer::{transfer_pipeline, TransferBranch};
use skyrmion_core::{Error, Result};

use crate::config::RunConfig;

pub const SWEEP_HEADER: &str = "knob,value,F_sim,F_analytic,purity,concurrence,discord,nsk,degenerate";

/// Grid used for Monte-Carlo error bars on the charge: the smooth
/// derivative estimator is evaluated per bootstrap replica, so it runs on a
/// coarser grid than the headline render.
const MC_CHARGE_GRID: usize = 128;

fn label_name(label: BellLabel) -> &'static str {
    match label {
        BellLabel::PhiPlus => "Phi+",
        BellLabel::PhiMinus => "Phi-",
        BellLabel::PsiPlus => "Psi+",
        BellLabel::PsiMinus => "Psi-",
    }
}

fn fmt(x: f64) -> String {
    format!("{x:.8e}")
}

fn ensure_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out)?;
    Ok(())
}

fn branch_state(branch: &TransferBranch) -> Result<&DensityOperator> {
    branch.state.as_ref().ok_or_else(|| {
        Error::Singular(format!(
            "branch {:?} has zero probability and no conditional state",
            branch.label
        ))
    })
}

fn analyze(cfg: &RunConfig, rho: &DensityOperator, grid: TransverseGrid) -> Result<(StokesField, TextureAnalysis)> {
    let field = stokes_nonlocal(rho, grid, &cfg.render_modes())?;
    let analysis = analyze_texture(&field, DEGENERACY_EPSILON)?;
    Ok((field, analysis))
}

// ---------------------------------------------------------------------------
// sweeps

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub knob: &'static str,
    pub value: f64,
    pub f_sim: f64,
    pub f_analytic: f64,
    pub purity: f64,
    pub concurrence: f64,
    pub discord: f64,
    pub nsk: f64,
    pub degenerate: bool,
}

impl SweepRow {
    fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.knob,
            fmt(self.value),
            fmt(self.f_sim),
            fmt(self.f_analytic),
            fmt(self.purity),
            fmt(self.concurrence),
            fmt(self.discord),
            fmt(self.nsk),
            self.degenerate as u8
        )
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.csv_line());
        out.push('\n');
    }
    out
}

/// 21 evenly spaced points on [0, 1] plus the exact threshold points, so
/// threshold assertions never depend on grid placement.
pub fn sweep_points(thresholds: &[f64]) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=20).map(|k| k as f64 / 20.0).collect();
    pts.extend_from_slice(thresholds);
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    pts
}

/// One sweep row: run the corrected transfer under `noise`, read every
/// diagnostic off the identity branch. Discord uses the Bell-diagonal
/// closed form with the numerical minimizer as fallback for any state that
/// drifts off the Bell-diagonal family.
fn sweep_row(
    cfg: &RunConfig,
    knob: &'static str,
    value: f64,
    noise: &NoiseParams,
    f_analytic: f64,
    grid: TransverseGrid,
) -> Result<SweepRow> {
    let spec = cfg.spec();
    let target = nonlocal_skyrmion(&spec);
    let branches = transfer_pipeline(&spec, noise, true)?;
    let state = branch_state(&branches[0])?;
    let discord = discord_bell_diagonal(state).or_else(|_| discord_numeric(state, 12, 1e-10))?;
    let (_, analysis) = analyze(cfg, state, grid)?;
    Ok(SweepRow {
        knob,
        value,
        f_sim: fidelity_pure(&target, state)?,
        f_analytic,
        purity: purity(state),
        concurrence: concurrence(state)?,
        discord,
        nsk: analysis.nsk,
        degenerate: analysis.degenerate,
    })
}

/// Sweep the isotropic admixture xi0 (the other noise knobs are held at
/// zero so the analytic column stays exact) and write `sweep_isotropic.csv`.
pub fn cmd_sweep_isotropic(cfg: &RunConfig) -> Result<String> {
    ensure_out(cfg)?;
    let grid = cfg.grid_spec();
    let rows: Result<Vec<SweepRow>> = sweep_points(&[2.0 / 3.0])
        .into_par_iter()
        .map(|xi0| {
            let noise = NoiseParams::new(xi0, 0.0, PauliAxis::Z, 0.0, 0.0)?;
            sweep_row(cfg, "xi0", xi0, &noise, (1.0 - 0.75 * xi0).sqrt(), grid)
        })
        .collect();
    let rows = rows?;
    let path = cfg.out.join("sweep_isotropic.csv");
    std::fs::write(&path, sweep_csv(&rows))?;
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    Ok(format!(
        "isotropic sweep: {} rows ({} degenerate) -> {}",
        rows.len(),
        degenerate,
        path.display()
    ))
}

/// Sweep a polarization flip channel on the chosen axis (lambda1 is taken
/// from the config so imperfect loading can be studied on top) and write
/// `sweep_flip_<axis>.csv`.
pub fn cmd_sweep_flip(cfg: &RunConfig, axis: PauliAxis) -> Result<String> {
    ensure_out(cfg)?;
    let grid = cfg.grid_spec();
    let rows: Result<Vec<SweepRow>> = sweep_points(&[0.5])
        .into_par_iter()
        .map(|p| {
            let noise = NoiseParams::new(0.0, p, axis, cfg.lambda1, 0.0)?;
            sweep_row(cfg, "p", p, &noise, fidelity_flip(cfg.lambda1, p)?, grid)
        })
        .collect();
    let rows = rows?;
    let name = match axis {
        PauliAxis::X => "sweep_flip_x.csv",
        PauliAxis::Y => "sweep_flip_y.csv",
        PauliAxis::Z => "sweep_flip_z.csv",
    };
    let path = cfg.out.join(name);
    std::fs::write(&path, sweep_csv(&rows))?;
    let degenerate = rows.iter().filter(|r| r.degenerate).count();
    Ok(format!(
        "flip sweep ({axis:?}): {} rows ({} degenerate) -> {}",
        rows.len(),
        degenerate,
        path.display()
    ))
}

// ---------------------------------------------------------------------------
// transfer

fn reconstruct(records: &[CountRecord]) -> Result<DensityOperator> {
    let linear = reconstruct_linear(records)?;
    let projected = project_physical(&linear.matrix)?;
    Ok(mle_refine(records, &projected, 200, 1e-9)?.state)
}

fn mc_grid(cfg: &RunConfig) -> TransverseGrid {
    TransverseGrid::new(MC_CHARGE_GRID.min(cfg.grid), cfg.extent).expect("validated extent")
}

/// Run the measurement-and-correct transfer and report all four outcomes.
/// With `tomo_replicas >= 2` each branch is additionally pushed through
/// simulated counting and reconstruction, with bootstrap error bars.
pub fn cmd_transfer(cfg: &RunConfig) -> Result<String> {
    let spec = cfg.spec();
    let target = nonlocal_skyrmion(&spec);
    let branches = transfer_pipeline(&spec, &cfg.noise(), true)?;
    let grid = cfg.grid_spec();

    let mut lines = vec![format!(
        "transfer of l = {} texture (xi0 = {}, flip = {:?}/{}, lambda1 = {})",
        cfg.l, cfg.xi0, cfg.flip_axis, cfg.flip_p, cfg.lambda1
    )];
    for branch in &branches {
        let state = branch_state(branch)?;
        let f = fidelity_pure(&target, state)?;
        let (_, analysis) = analyze(cfg, state, grid)?;
        let charge = if analysis.degenerate {
            "degenerate".to_string()
        } else {
            format!("N_sk = {:+.6}", analysis.nsk)
        };
        lines.push(format!(
            "  {:<5} probability = {:.9}  fidelity = {:.9}  {charge}",
            label_name(branch.label),
            branch.probability,
            f
        ));
    }

    if cfg.tomo_replicas >= 2 {
        lines.push(format!(
            "  reconstructed from {} pairs/setting, background {}, {} bootstrap replicas:",
            cfg.tomo_shots, cfg.background, cfg.tomo_replicas
        ));
        let charge_grid = mc_grid(cfg);
        let modes = cfg.render_modes();
        for (i, branch) in branches.iter().enumerate() {
            let state = branch_state(branch)?;
            let records =
                simulate_counts(state, cfg.tomo_shots, cfg.background, cfg.seed.wrapping_add(i as u64))?;
            let recon = reconstruct(&records)?;
            let f_recon = fidelity_pure(&target, &recon)?;
            let f_mc = monte_carlo_uncertainty(&records, cfg.tomo_replicas, cfg.seed ^ 0xF1DE, |s| {
                fidelity_pure(&target, s)
            })?;
            let n_mc = monte_carlo_uncertainty(&records, cfg.tomo_replicas, cfg.seed ^ 0x5ced, |s| {
                let field = stokes_nonlocal(s, charge_grid, &modes)?;
                skyrmion_number_fd(&field, DEGENERACY_EPSILON)
            })?;
            lines.push(format!(
                "  {:<5} fidelity = {:.4} +- {:.4}  N_sk = {:+.4} +- {:.4}",
                label_name(branch.label),
                f_recon,
                f_mc.std_dev,
                n_mc.mean,
                n_mc.std_dev
            ));
        }
    }
    Ok(lines.join("\n"))
}

// ---------------------------------------------------------------------------
// texture

/// Render the transferred texture with the configured noise, write the
/// Stokes CSV and a companion summary (charge, boundary winding, closure
/// truncation, degeneracy).
pub fn cmd_texture(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    ensure_out(cfg)?;
    let spec = cfg.spec();
    let branches = transfer_pipeline(&spec, &cfg.noise(), true)?;
    let state = branch_state(&branches[0])?;
    let (field, analysis) = analyze(cfg, state, cfg.grid_spec())?;

    let stokes_path = cfg.out.join("stokes.csv");
    write_stokes_csv(&field, &stokes_path)?;

    let mut summary = String::new();
    summary.push_str(&format!("l = {}\n", cfg.l));
    summary.push_str(&format!("grid = {}\n", cfg.grid));
    summary.push_str(&format!("extent = {}\n", fmt(cfg.extent)));
    summary.push_str(&format!("degenerate = {}\n", analysis.degenerate as u8));
    summary.push_str(&format!("nsk = {}\n", fmt(analysis.nsk)));
    if !analysis.degenerate {
        summary.push_str(&format!(
            "nsk_fd = {}\n",
            fmt(skyrmion_number_fd(&field, DEGENERACY_EPSILON)?)
        ));
    }
    summary.push_str(&format!("boundary_winding = {}\n", fmt(analysis.boundary_winding)));
    summary.push_str(&format!("truncation = {}\n", fmt(analysis.truncation)));
    let summary_path = cfg.out.join("texture_summary.txt");
    std::fs::write(&summary_path, summary)?;
    Ok((stokes_path, summary_path))
}

pub fn cmd_texture_report(cfg: &RunConfig) -> Result<String> {
    let (stokes_path, summary_path) = cmd_texture(cfg)?;
    Ok(format!(
        "texture written: {} and {}",
        stokes_path.display(),
        summary_path.display()
    ))
}

// ---------------------------------------------------------------------------
// tomography

/// Simulate counting on the transferred state, reconstruct it three ways
/// (linear, projected, likelihood-refined), write counts and density CSVs,
/// and report fidelity/purity/charge of the refined estimate.
pub fn cmd_tomo(cfg: &RunConfig) -> Result<String> {
    ensure_out(cfg)?;
    let spec = cfg.spec();
    let target = nonlocal_skyrmion(&spec);
    let branches = transfer_pipeline(&spec, &cfg.noise(), true)?;
    let truth = branch_state(&branches[0])?;

    let records = simulate_counts(truth, cfg.tomo_shots, cfg.background, cfg.seed)?;
    let counts_path = cfg.out.join("counts.csv");
    std::fs::write(&counts_path, counts_to_csv(&records))?;

    let linear = reconstruct_linear(&records)?;
    std::fs::write(cfg.out.join("density_linear.csv"), density_to_csv(&linear.matrix))?;
    let projected = project_physical(&linear.matrix)?;
    let refined = mle_refine(&records, &projected, 200, 1e-9)?;
    std::fs::write(cfg.out.join("density_mle.csv"), density_to_csv(refined.state.mat()))?;

    let (_, analysis) = analyze(cfg, &refined.state, cfg.grid_spec())?;
    let mut lines = vec![
        format!(
            "tomography: {} pairs/setting, background {}, seed {} -> {}",
            cfg.tomo_shots,
            cfg.background,
            cfg.seed,
            counts_path.display()
        ),
        format!(
            "  linear estimate physical: {}; likelihood refinement: {} iterations, converged = {}",
            linear.physical, refined.iterations, refined.converged
        ),
        format!(
            "  fidelity to ideal target = {:.6}  purity = {:.6}",
            fidelity_pure(&target, &refined.state)?,
            purity(&refined.state)
        ),
        if analysis.degenerate {
            "  texture: degenerate".to_string()
        } else {
            format!("  N_sk = {:+.6}", analysis.nsk)
        },
    ];

    if cfg.tomo_replicas >= 2 {
        let f_mc = monte_carlo_uncertainty(&records, cfg.tomo_replicas, cfg.seed ^ 0xF1DE, |s| {
            fidelity_pure(&target, s)
        })?;
        let charge_grid = mc_grid(cfg);
        let modes = cfg.render_modes();
        let n_mc = monte_carlo_uncertainty(&records, cfg.tomo_replicas, cfg.seed ^ 0x5ced, |s| {
            let field = stokes_nonlocal(s, charge_grid, &modes)?;
            skyrmion_number_fd(&field, DEGENERACY_EPSILON)
        })?;
        lines.push(format!(
            "  bootstrap ({} replicas): fidelity = {:.4} +- {:.4}  N_sk = {:+.4} +- {:.4}",
            cfg.tomo_replicas, f_mc.mean, f_mc.std_dev, n_mc.mean, n_mc.std_dev
        ));
    }
    Ok(lines.join("\n"))
}
