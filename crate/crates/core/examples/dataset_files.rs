//! Generates a joint distribution, writes it to CSV, reads it back and
//! writes annealing branches and a JSON summary next to it.
//!
//! ```bash
//! cargo run --example dataset_files [out_dir]
//! ```

use std::path::PathBuf;

use infodist::anneal::{anneal, AnnealSchedule};
use infodist::dataset::{
    gen_four_gaussian, load_joint, save_joint, write_branches_csv, write_summary, EventRecord,
    GaussianMixtureSpec, Summary, Unit,
};
use infodist::ObjectiveKind;

fn main() -> infodist::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("infodist-example"));
    std::fs::create_dir_all(&dir)?;

    let mut spec = GaussianMixtureSpec::diagonal(3, 0.12, (20, 20));
    spec.jitter = 0.01;
    spec.rng_seed = 7;
    let p = gen_four_gaussian(&spec)?;
    let joint = dir.join("joint.csv");
    save_joint(&p, &joint)?;
    let back = load_joint(&joint)?;
    println!(
        "{} round trip exact: {}",
        joint.display(),
        back.matrix() == p.matrix()
    );

    let kind = ObjectiveKind::InformationDistortion;
    let outcome = anneal(kind, &back, 3, &AnnealSchedule::default())?;
    let unit = Unit::Bits;
    write_branches_csv(&outcome.branches, unit, dir.join("branches.csv"))?;
    let summary = Summary {
        command: "example".into(),
        objective: Some(kind),
        classes: Some(3),
        unit,
        seed: Some(0),
        mutual_information_xy: Some(unit.from_nats(back.mutual_information())),
        bifurcations: outcome
            .events
            .iter()
            .map(|e| EventRecord::new(e, unit))
            .collect(),
        theorem3: None,
        checks: Vec::new(),
    };
    write_summary(&summary, dir.join("summary.json"))?;
    println!("wrote branches.csv and summary.json to {}", dir.display());
    Ok(())
}
