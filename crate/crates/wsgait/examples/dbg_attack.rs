use wsgait::attack::*;
use wsgait::derive_seed;
use wsgait::signal::*;
use wsgait::synth::*;

fn main() {
    let target = SubjectProfile::generate("S02", 77);
    let imitator = matched_imitator(&target, "imit", derive_seed(77, &["imit"]), 0.03);
    println!(
        "target: period={:.3} speed={} | imit: period={:.3} speed={}",
        target.base_period_s,
        target.natural.speed_mph,
        imitator.profile.base_period_s,
        imitator.profile.natural.speed_mph
    );
    let runs = calibration_sweep(&imitator, 60.0, 50.0, 8).unwrap();
    let db = ImitatorDatabase::from_sweep(&runs, &FrameParams::default()).unwrap();
    let stolen = synthesize(&target, &target.natural, Session::Training, 105.0, 50.0, 901).unwrap();
    let result = run_attack(&stolen, &imitator, db, &[], &AttackOptions::default()).unwrap();
    println!("termination {:?} iterations {}", result.termination, result.iterations);
    for r in &result.trace {
        println!(
            "it {:2} closest={:10} gcat=({}) fr=[{}] instr={:?}",
            r.iteration,
            r.closest_tag,
            r.gcat.label(),
            r.fractions
                .iter()
                .map(|(f, v)| format!("{f}={v:.2}"))
                .collect::<Vec<_>>()
                .join(" "),
            r.instruction
                .as_ref()
                .map(|i| format!("{:?} {:?} by {}", i.direction, i.knob, i.driving_feature))
        );
    }
}
