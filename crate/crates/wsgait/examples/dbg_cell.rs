use std::time::Instant;
use wsgait::derive_seed;
use wsgait::evaluation::*;
use wsgait::features::FeatureCatalog;
use wsgait::io::read_recording_csv;
use wsgait::modeling::*;
use wsgait::signal::SensorKind;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let kind = ClassifierKind::from_token(&args[1]).unwrap();
    let dir = std::path::Path::new("/tmp/full");
    let mut recs = Vec::new();
    let mut paths: Vec<_> = std::fs::read_dir(dir.join("dataset/recordings"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    for p in paths {
        recs.push(read_recording_csv(&p).unwrap());
    }
    let cfg = GridEvalConfig { seed: 1, ..Default::default() };
    let (subjects, _) = prepare_subjects(&recs, &cfg.frame).unwrap();
    let catalog = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let combo = SensorCombo::single(SensorKind::Accelerometer);
    let mut total_far = 0.0;
    let mut total_frr = 0.0;
    let t0 = Instant::now();
    for si in 0..subjects.len().min(6) {
        let imp = impostor_train_rows(&subjects, si, cfg.impostor_train_total);
        let seed = derive_seed(cfg.seed, &["cell", &subjects[si].id, kind.token(), &combo.label()]);
        let model = build_user_model(kind, &combo, &subjects[si].train_rows, &imp, &catalog, &cfg, seed).unwrap();
        let genuine = classify_rows(&model, &subjects[si].test_rows, &catalog).unwrap();
        let mut imp_acc = 0usize;
        let mut imp_tot = 0usize;
        for (oi, other) in subjects.iter().enumerate() {
            if oi != si {
                let out = classify_rows(&model, &other.test_rows, &catalog).unwrap();
                imp_acc += out.iter().filter(|&&a| a).count();
                imp_tot += out.len();
            }
        }
        let frr = genuine.iter().filter(|&&a| !a).count() as f64 / genuine.len() as f64;
        let far = imp_acc as f64 / imp_tot as f64;
        println!(
            "{}: params=[{}] train_err={:.3} frr={:.2} far={:.3}",
            subjects[si].id, model.params, model.train_error, frr, far
        );
        total_far += far;
        total_frr += frr;
    }
    println!("mean frr={:.3} far={:.3}  elapsed={:?}", total_frr / 6.0, total_far / 6.0, t0.elapsed());
}
