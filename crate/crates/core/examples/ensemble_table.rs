//! Draws a ground-truth ensemble from the scenario table and summarizes it
//! the same way measured channels are summarized.

use a2glab::channel::UcaGeometry;
use a2glab::clustering::{Clustering, McdConfig};
use a2glab::error::Result;
use a2glab::hrpe::ChannelEstimate;
use a2glab::stats::{cluster_level_stats, ensemble_summary, EnsembleLabel, Metric, SummaryTable};
use a2glab::synth::{draw_scenario_clusters, Scenario, ScenarioStatsConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Returns the mean log10 composite delay spread of the ensemble.
pub fn run_example() -> Result<f64> {
    let table = ScenarioStatsConfig::builtin();
    let array = UcaGeometry::default();
    let cfg = McdConfig::default();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut stats = Vec::new();
    for _ in 0..300 {
        let drawn = draw_scenario_clusters(&table, Scenario::Rural, 0, &mut rng)?;
        let mut order: Vec<usize> = (0..drawn.paths.len()).collect();
        order.sort_by(|&a, &b| drawn.paths[b].power().total_cmp(&drawn.paths[a].power()));
        let paths: Vec<_> = order.iter().map(|&i| drawn.paths[i]).collect();
        let labels: Vec<usize> = order.iter().map(|&i| drawn.cluster_ids[i]).collect();
        let estimate = ChannelEstimate::from_paths(&paths, &array)?;
        let clustering = Clustering::from_labels(&estimate, &labels, f64::NAN, &cfg)?;
        stats.push(cluster_level_stats(&clustering, &estimate)?);
    }
    let row = ensemble_summary(&stats, &EnsembleLabel::new("rural", 0))?;
    let mean = row
        .get(Metric::CompositeDelaySpread)
        .mean
        .unwrap_or(f64::NAN);
    print!("{}", SummaryTable { rows: vec![row] }.to_text());
    Ok(mean)
}

fn main() -> Result<()> {
    run_example().map(|_| ())
}
