use std::path::PathBuf;

use qcl_core::harness::{scaling_sweep, CsvRow, Strategy, SweepConfig, SweepFamily};
use qcl_core::plot::{emit_plot, render_svg};
use qcl_core::qsim::SimulatorCaps;

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

#[test]
fn pinned_sweep_renders_the_golden_svg() {
    let cfg = SweepConfig { family: SweepFamily::Collision, strategy: Strategy::CollisionCheck, ns: vec![128, 256], qs: vec![1, 3, 5, 7], trials: 1500, seed: 2024 };
    let res = scaling_sweep(&cfg, &SimulatorCaps::default()).unwrap();
    let svg = render_svg(&CsvRow::from_sweep("golden", &res), res.envelope_constant, "golden sweep").unwrap();
    let path = golden("sweep.svg");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &svg).unwrap();
    }
    let want = std::fs::read_to_string(&path).expect("golden file; regenerate with UPDATE_GOLDEN=1");
    assert_eq!(svg, want);
}

#[test]
fn empty_report_writes_nothing() {
    let dir = std::env::temp_dir().join(format!("qcl-plot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("empty.svg");
    assert!(!emit_plot(&[], Some(1.0), "empty", &path).unwrap());
    assert!(!path.exists());
}
