use wsgait::derive_seed;
use wsgait::evaluation::*;
use wsgait::features::FeatureCatalog;
use wsgait::io::read_recording_csv;
use wsgait::modeling::{ClassifierKind, ModelParams};
use wsgait::signal::SensorKind;

fn main() {
    let dir = std::path::Path::new("/tmp/smoke/out");
    let mut recs = Vec::new();
    for sub in ["dataset/recordings", "attack/mimicry"] {
        let mut paths: Vec<_> = std::fs::read_dir(dir.join(sub))
            .unwrap()
            .map(|e| e.unwrap().path())
            .collect();
        paths.sort();
        for p in paths {
            recs.push(read_recording_csv(&p).unwrap());
        }
    }
    let cfg = GridEvalConfig { impostor_train_total: 40, seed: 7, ..Default::default() };
    let (subjects, _) = prepare_subjects(&recs, &cfg.frame).unwrap();
    let catalog = FeatureCatalog::for_sensors(&SensorKind::ALL);
    let combo = SensorCombo::single(SensorKind::Accelerometer);
    let si = 4; // S05, the converged one
    let imp = impostor_train_rows(&subjects, si, cfg.impostor_train_total);
    let seed = derive_seed(cfg.seed, &["cell", &subjects[si].id, "bayes", &combo.label()]);
    let model = build_user_model(ClassifierKind::Bayes, &combo, &subjects[si].train_rows, &imp, &catalog, &cfg, seed).unwrap();
    let ModelParams::Bayes(nb) = &model.model else { panic!() };

    let index: std::collections::BTreeMap<&str, usize> =
        catalog.entries.iter().enumerate().map(|(i, e)| (e.id.as_str(), i)).collect();
    let cols: Vec<usize> = model.features.names.iter().map(|n| index[n.as_str()]).collect();

    // mean per-feature z^2 wrt the genuine class, for test vs mimicry rows
    for (label, rows) in [("test", &subjects[si].test_rows), ("spoof", &subjects[si].mimicry_rows)] {
        let mut z2 = vec![0.0f64; cols.len()];
        for row in rows.iter() {
            let gathered: Vec<f64> = cols.iter().map(|&c| row[c]).collect();
            let scaled = model.scaler.transform(&gathered);
            for (k, v) in scaled.iter().enumerate() {
                let d = v - nb.mean_genuine[k];
                z2[k] += d * d / nb.var_genuine[k];
            }
        }
        let n = rows.len() as f64;
        let mut ranked: Vec<(f64, &String)> = z2
            .iter()
            .zip(&model.features.names)
            .map(|(z, name)| (z / n, name))
            .collect();
        ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
        println!("--- {label}: total mean z2 = {:.1}", ranked.iter().map(|r| r.0).sum::<f64>());
        for (z, name) in ranked.iter().take(8) {
            println!("  {name:<28} {z:>10.2}");
        }
        let accepts = rows
            .iter()
            .filter(|row| {
                let gathered: Vec<f64> = cols.iter().map(|&c| row[c]).collect();
                model.decide_row(&gathered).accept
            })
            .count();
        println!("  accepts: {accepts}/{}", rows.len());
    }
}
