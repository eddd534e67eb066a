//! The README library example: one run, one fit, one classification.

use gehm_core::{
    classify_regime, detect_blowup, generate, nonlinear_eigenpair, simulate,
    spectral_radius, GammaBasis, GehmError, GraphModel, GraphModelSpec,
    RegimeEvidence, SimulationConfig,
};

fn main() -> Result<(), GehmError> {
    let graph = generate(&GraphModelSpec {
        model: GraphModel::BarabasiAlbert { m: 3 },
        n: 200,
        seed: 7,
    })?;

    let cfg = SimulationConfig::default();
    let traj = simulate(&graph, &cfg)?;
    let fit = detect_blowup(&traj)?;

    let eig = nonlinear_eigenpair(&graph, cfg.p, 1e-10, 10_000, cfg.seed)?;
    let gamma = spectral_radius(&graph, GammaBasis::RawAdjacency, 1e-10, 10_000, cfg.seed)?;
    let r = 0.0 - eig.lambda_p + gamma.rho; // C_F = 0 here
    let regime = classify_regime(
        r,
        0.05,
        Some(&RegimeEvidence { fitted_rate: fit.growth_rate, t_star: fit.t_star }),
    );
    println!(
        "lambda_p = {:.4}, gamma = {:.4}, regime = {regime}",
        eig.lambda_p, gamma.rho
    );
    Ok(())
}
