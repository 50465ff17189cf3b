//! Mutual-neighbor metrics, cross-mapping and continuity on coupled Hénon
//! maps, uncoupled vs moderately coupled.
//!
//!     cargo run --release --example henon_heuristics

use closeness::dynamics::SystemKind;
use closeness::embedding::NeighborQuery;
use closeness::heuristics::{ccm, continuity_curves, CcmSettings, MutualNeighbors, PecoraSettings};
use closeness::pipeline::{observe, EmbeddingSpec, SimulationSpec};

fn main() -> closeness::Result<()> {
    let seed = 11;
    let sim = SimulationSpec::for_kind(SystemKind::HenonHenon, 10_000);
    let emb = EmbeddingSpec::for_kind(SystemKind::HenonHenon);
    for c in [0.0, 0.4] {
        let (_, v) = observe(&sim, &emb, c, seed)?;
        let (nx, ny) = (&v.gamma_x, &v.phi_y);
        let mn = MutualNeighbors::new(nx, ny, NeighborQuery::new(5, emb.theiler_window))?;
        let m = mn.m_result()?;
        let l = mn.l_result()?;
        println!("C = {c}");
        println!(
            "  M(X|Y) = {:.4}  M(Y|X) = {:.4}  dM = {:.4}",
            m.m_xy, m.m_yx, m.delta_m
        );
        let p = l.wilcoxon.map_or(f64::NAN, |w| w.p_one_sided);
        println!(
            "  L(X|Y) = {:.4}  L(Y|X) = {:.4}  dL = {:.4}  p = {p:.2e}",
            l.l_xy, l.l_yx, l.delta_l
        );

        let settings = CcmSettings::new(vec![100, 300, 1000, 3000, 9997], emb.theiler_window);
        let y_to_x = ccm(&ny.points, &v.m_x, &settings, seed)?;
        let x_to_y = ccm(&nx.points, &v.m_y, &settings, seed)?;
        println!(
            "  CCM N_y->x {:?} rho = {:.3}",
            fmt(&y_to_x.skill),
            y_to_x.trend
        );
        println!(
            "  CCM N_x->y {:?} rho = {:.3}",
            fmt(&x_to_y.skill),
            x_to_y.trend
        );

        let ps = PecoraSettings::new(vec![0.01, 0.03, 0.1, 0.3], 500, emb.theiler_window);
        let cc = continuity_curves(&ny.points, &nx.points, &ps, seed)?;
        println!("  Theta(N_y->N_x) {:?}", fmt(&cc.forward.theta));
        println!("  Theta(N_x->N_y) {:?}", fmt(&cc.inverse.theta));
    }
    Ok(())
}

fn fmt(v: &[f64]) -> Vec<String> {
    v.iter().map(|x| format!("{x:.3}")).collect()
}
