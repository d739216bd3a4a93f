//! Build a projection index over synthetic points and answer a k-NN query,
//! once from radius 1 and once from a guessed starting radius.

use rolsh::data::{split_queries, synth_dataset, Profile};
use rolsh::lsh::{build_index, exact_knn, query_knn, query_knn_predicted, LshParams, QueryPlan};

fn main() -> rolsh::Result<()> {
    let data = synth_dataset(Profile::SiftLike, 5_010, 32, 7);
    let split = split_queries(&data, 10, 8)?;

    let params = LshParams::default();
    let table = build_index(&split.index, params.projection_count()?, params.w, 9)?;
    let settings = params.search_settings(table.n(), table.m())?;
    println!("n = {}, d = {}, m = {}, l = {}", table.n(), table.d(), table.m(), settings.l);

    let q = split.queries.row(0).to_vec();
    let plan = QueryPlan::new(q.clone(), 5, &settings);
    let res = query_knn(&table, &plan, &split.index)?;
    println!(
        "from radius 1: {} levels, terminal radius {}, {} candidates",
        res.levels_visited, res.terminal_radius, res.candidates
    );

    let guessed = query_knn_predicted(&table, &plan, &split.index, res.terminal_radius as f64 * 0.9)?;
    println!(
        "from a guess:  {} levels, start radius {}, terminal radius {}",
        guessed.levels_visited, guessed.start_radius, guessed.terminal_radius
    );

    let truth = exact_knn(&split.index, &q, 5)?;
    for (got, want) in res.neighbors.iter().zip(&truth) {
        println!("  id {:5} at {:8.2}   (exact: id {:5} at {:8.2})", got.id, got.distance, want.id, want.distance);
    }
    Ok(())
}
