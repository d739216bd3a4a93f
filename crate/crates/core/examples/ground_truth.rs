//! Label held-out queries with their terminal search radius for several k,
//! then draw a scaled-down training scenario from the pool.

use rolsh::data::{split_queries, synth_dataset, Profile};
use rolsh::learn::{build_scenario, generate_ground_truth, FeatureMode, ScenarioSpec};
use rolsh::lsh::{build_index, LshParams};

fn main() -> rolsh::Result<()> {
    let data = synth_dataset(Profile::DeepLike, 4_300, 32, 11);
    let split = split_queries(&data, 300, 12)?;
    let params = LshParams::default();
    let table = build_index(&split.index, params.projection_count()?, params.w, 13)?;
    let settings = params.search_settings(table.n(), table.m())?;

    let spec = ScenarioSpec::standard(3)?.scaled(0.02)?;
    println!("scenario 3 at 2%: k = {:?}, {} train, {} test", spec.k_values, spec.total_size, spec.test_size());

    let pool = generate_ground_truth(&table, &split.index, &split.queries, &spec.k_values, &settings, FeatureMode::Hashes)?;
    println!("pool: {} samples with {} features each", pool.len(), pool[0].features.len());

    let (train, test) = build_scenario(&pool, &spec, 14)?;
    for k in &spec.k_values {
        let labels: Vec<f64> = train.iter().filter(|s| s.k == *k).map(|s| s.label).collect();
        let mean = labels.iter().sum::<f64>() / labels.len() as f64;
        println!("  k = {k:3}: {} samples, mean terminal radius {mean:.1}", labels.len());
    }
    println!("test samples: {}", test.len());
    Ok(())
}
