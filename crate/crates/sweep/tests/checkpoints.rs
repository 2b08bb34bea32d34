use std::fs;
use std::time::Instant;

use cos2phi_sweep::run::{chunk_path, read_rows, sidecar_path};
use cos2phi_sweep::{run_sweep, LogAxis, RunOptions, SweepGrid};

fn small() -> SweepGrid {
    SweepGrid {
        ejs2: LogAxis::new(0.5, 30.0, 5),
        ec: LogAxis::new(0.05, 5.0, 4),
        dphi: LogAxis::new(1e-5, 9e-3, 5),
        ..SweepGrid::reduced(-0.1)
    }
}

fn chunk_bytes(dir: &std::path::Path, hash: &str, n: usize) -> Vec<Vec<u8>> {
    (0..n).map(|k| fs::read(chunk_path(dir, hash, k)).unwrap()).collect()
}

#[test]
fn worker_count_does_not_change_output_bytes() {
    let g = small();
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let serial = RunOptions { workers: Some(1), chunk_cells: 6, checkpoint_dir: Some(a.path().into()), ..Default::default() };
    let parallel = RunOptions { workers: Some(3), checkpoint_dir: Some(b.path().into()), ..serial.clone() };
    let rs = run_sweep(&g, &serial).unwrap();
    let rp = run_sweep(&g, &parallel).unwrap();
    assert_eq!(rs.rows, rp.rows);
    assert_eq!(chunk_bytes(a.path(), &rs.config_hash, rs.chunks_total), chunk_bytes(b.path(), &rp.config_hash, rp.chunks_total));
    assert_eq!(fs::read(sidecar_path(a.path(), &rs.config_hash)).unwrap(), fs::read(sidecar_path(b.path(), &rs.config_hash)).unwrap());
}

#[test]
fn interrupted_run_resumes_to_the_same_result() {
    let g = small();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { chunk_cells: 6, checkpoint_dir: Some(dir.path().into()), ..Default::default() };

    let partial = run_sweep(&g, &RunOptions { stop_after_chunks: Some(2), ..opts.clone() }).unwrap();
    assert!(!partial.is_complete());
    assert_eq!(partial.chunks_done, 2);
    assert_eq!(partial.rows.len(), 12);

    let resumed = run_sweep(&g, &opts).unwrap();
    assert!(resumed.is_complete());
    assert_eq!(resumed.chunks_resumed, 2);

    let fresh_dir = tempfile::tempdir().unwrap();
    let fresh = run_sweep(&g, &RunOptions { checkpoint_dir: Some(fresh_dir.path().into()), ..opts.clone() }).unwrap();
    assert_eq!(resumed.rows, fresh.rows);
    assert_eq!(
        chunk_bytes(dir.path(), &resumed.config_hash, resumed.chunks_total),
        chunk_bytes(fresh_dir.path(), &fresh.config_hash, fresh.chunks_total)
    );
}

#[test]
fn corrupt_or_foreign_chunks_are_recomputed() {
    let g = small();
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { chunk_cells: 6, checkpoint_dir: Some(dir.path().into()), ..Default::default() };
    let first = run_sweep(&g, &opts).unwrap();
    let p0 = chunk_path(dir.path(), &first.config_hash, 0);
    fs::write(&p0, "garbage\n").unwrap();
    // Rows of chunk 2 written where chunk 1 belongs.
    fs::copy(chunk_path(dir.path(), &first.config_hash, 2), chunk_path(dir.path(), &first.config_hash, 1)).unwrap();
    let again = run_sweep(&g, &opts).unwrap();
    assert_eq!(again.chunks_resumed, first.chunks_total - 2);
    assert_eq!(again.rows, first.rows);
    assert_eq!(read_rows(&p0).unwrap(), first.rows[..6]);
}

#[test]
fn different_configs_do_not_share_checkpoints() {
    let dir = tempfile::tempdir().unwrap();
    let opts = RunOptions { checkpoint_dir: Some(dir.path().into()), ..Default::default() };
    let a = run_sweep(&small(), &opts).unwrap();
    let mut g = small();
    g.ng = 0.2;
    let b = run_sweep(&g, &opts).unwrap();
    assert_ne!(a.config_hash, b.config_hash);
    assert_eq!(b.chunks_resumed, 0);
}

#[test]
fn reduced_grid_runs_at_desk_scale() {
    let g = SweepGrid::reduced(-0.1);
    let t = Instant::now();
    let res = run_sweep(&g, &RunOptions::default()).unwrap();
    let secs = t.elapsed().as_secs_f64();
    assert!(res.is_complete());
    assert_eq!(res.rows.len(), 441);
    let best = res.best().unwrap();
    eprintln!(
        "reduced grid: {secs:.1} s, best T2 {:.3e} s at E_JS2 {:.3} GHz, E_C {:.4} GHz, dphi {:.1e}; boundary fraction {:.3}",
        best.t2_s, best.ejs2_ghz, best.ec_ghz, best.dphi, res.boundary_fraction()
    );
    assert!(secs < 1800.0);
}
