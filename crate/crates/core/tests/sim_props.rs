use hcsdr::sim::{generate, run_experiment, EtaKind, ExpParam, ExperimentGrid, Model, ModelSpec, Predictors};
use hcsdr::{InitTag, SeedSpec};

#[test]
fn same_seed_same_dataset() {
    for predictors in [Predictors::Normal, Predictors::NonNormal] {
        let spec = ModelSpec::new(Model::II, EtaKind::NonSparse, predictors);
        let a = generate(&spec, 50, SeedSpec::new(8, 3), ExpParam::Rate).unwrap();
        let b = generate(&spec, 50, SeedSpec::new(8, 3), ExpParam::Rate).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, generate(&spec, 50, SeedSpec::new(8, 4), ExpParam::Rate).unwrap());
    }
}

fn small_grid() -> ExperimentGrid {
    ExperimentGrid {
        models: vec![Model::III],
        inits: vec![InitTag::Dr],
        sample_sizes: vec![40],
        replications: 4,
        ..Default::default()
    }
}

#[test]
fn adding_cells_leaves_existing_cells_alone() {
    let base = run_experiment(&small_grid()).unwrap();
    let wider = run_experiment(&ExperimentGrid {
        models: vec![Model::I, Model::III],
        inits: vec![InitTag::Sir, InitTag::Dr],
        sample_sizes: vec![30, 40],
        ..small_grid()
    })
    .unwrap();
    let a = base.cell(Model::III, Predictors::Normal, InitTag::Dr, 40).unwrap();
    let b = wider.cell(Model::III, Predictors::Normal, InitTag::Dr, 40).unwrap();
    assert_eq!((a.mean_raw, a.sd_raw, a.mean_hc, a.sd_hc), (b.mean_raw, b.sd_raw, b.mean_hc, b.sd_hc));
}

#[test]
fn thread_count_does_not_change_results() {
    let grid = ExperimentGrid { replications: 6, ..small_grid() };
    let run = |threads| {
        rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(|| run_experiment(&grid).unwrap())
    };
    assert_eq!(run(1).to_csv(), run(3).to_csv());
}

#[test]
fn refined_error_does_not_grow_with_n() {
    let summary = run_experiment(&ExperimentGrid { replications: 20, ..Default::default() }).unwrap();
    for &model in &Model::ALL {
        for init in [InitTag::Sir, InitTag::Save, InitTag::Dr] {
            let cells: Vec<_> = [100, 200, 400]
                .iter()
                .map(|&n| summary.cell(model, Predictors::Normal, init, n).unwrap())
                .collect();
            for w in cells.windows(2) {
                let pooled = ((w[0].sd_hc.powi(2) + w[1].sd_hc.powi(2)) / 20.0).sqrt();
                assert!(
                    w[1].mean_hc <= w[0].mean_hc + pooled,
                    "model {model} {init}: n={} {} then n={} {}",
                    w[0].n,
                    w[0].mean_hc,
                    w[1].n,
                    w[1].mean_hc
                );
            }
        }
    }
}
