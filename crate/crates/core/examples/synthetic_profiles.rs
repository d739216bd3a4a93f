//! The four synthetic dataset profiles and their value ranges.

use rolsh::data::{synth_dataset, DataSource, DatasetMeta, Profile};

fn main() {
    for p in Profile::ALL {
        let data = synth_dataset(p, 2_000, 24, 3);
        let meta = DatasetMeta::describe(p.name(), DataSource::Synthetic, &data);
        println!(
            "{:13} n = {} d = {} range [{:.2}, {:.2}]",
            meta.name, meta.n, meta.d, meta.value_range.0, meta.value_range.1
        );
    }
}
