//! Closeness-principle heuristics: mutual-neighbor metrics, cross-mapping and
//! continuity statistics.

pub mod ccm;
pub mod neighbors;
pub mod pecora;
pub mod wilcoxon;

pub use ccm::{ccm, pearson, simplex_weights, spearman, CcmResult, CcmSettings, SkillMetric};
pub use neighbors::{
    andrzejak_m, chicharro_l, LResult, MResult, MutualNeighbors, NeighborStats, RankStats,
};
pub use pecora::{
    continuity_curves, pecora_continuity, ContinuityCurves, ContinuityStat, PecoraSettings,
};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
