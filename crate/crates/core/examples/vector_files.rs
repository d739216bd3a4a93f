//! Write a dataset as .fvecs and .bvecs and read it back.

use rolsh::data::{read_bvecs, read_fvecs, synth_dataset, write_bvecs, write_fvecs, Profile};

fn main() -> rolsh::Result<()> {
    let dir = std::env::temp_dir().join("rolsh-vector-files");
    std::fs::create_dir_all(&dir)?;
    // mnist-like components are integers in 0..=255, so both formats are exact
    let data = synth_dataset(Profile::MnistLike, 100, 16, 1);

    let f = dir.join("points.fvecs");
    write_fvecs(std::io::BufWriter::new(std::fs::File::create(&f)?), &data)?;
    let (meta, back) = read_fvecs(&f)?;
    println!("{}: {} x {}, range {:?}, exact = {}", meta.name, meta.n, meta.d, meta.value_range, back == data);

    let b = dir.join("points.bvecs");
    write_bvecs(std::io::BufWriter::new(std::fs::File::create(&b)?), &data)?;
    let (meta, back) = read_bvecs(&b)?;
    println!("{}: {} x {}, exact = {}", meta.name, meta.n, meta.d, back == data);
    Ok(())
}
