use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use ringpair::csv_io::{read_table_csv, read_tags_csv, read_xy_csv, write_table_csv, write_tags_csv};
use ringpair::Error;
use ringpair_core::estimation::fit_lorentzian_dip;
use ringpair_core::montecarlo::TagStreams;
use ringpair_core::quantities::Transmittance;
use ringpair_core::resonator::{transmission_dip, ResonatorParams};

fn write(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

#[test]
fn table_round_trip_is_lossless() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let mut rng = ChaCha20Rng::seed_from_u64(12);
    let rows: Vec<Vec<f64>> = (0..1000)
        .map(|_| {
            vec![
                rng.random::<f64>(),
                rng.random_range(-1e3..1e3) * 10f64.powi(rng.random_range(-30..30)),
                f64::from_bits(rng.random_range(0x0010_0000_0000_0000..0x7fef_ffff_ffff_ffff)),
                -0.0,
            ]
        })
        .collect();
    write_table_csv(&path, &["a", "b", "c", "d"], &rows).unwrap();
    let table = read_table_csv(&path).unwrap();
    assert_eq!(table.header, ["a", "b", "c", "d"]);
    assert_eq!(table.rows.len(), rows.len());
    for (got, want) in table.rows.iter().zip(&rows) {
        let bits = |r: &Vec<f64>| r.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(got), bits(want));
    }
}

#[test]
fn empty_inputs_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    for text in ["", "freq_hz,transmission\n"] {
        let path = write(dir.path(), "empty.csv", text);
        assert!(matches!(read_xy_csv(&path), Err(Error::EmptySeries { .. })), "{text:?}");
    }
}

#[test]
fn malformed_rows_report_their_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "bad.csv", "x,y\n1,2\n2,3\n3,abc\n");
    match read_xy_csv(&path) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 4),
        other => panic!("{other:?}"),
    }
    let path = write(dir.path(), "short.csv", "x,y\n1,2\n2\n");
    assert!(matches!(read_xy_csv(&path), Err(Error::Parse { line: 3, .. })));
}

#[test]
fn optional_uncertainty_column() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "w.csv", "x,y,sigma\n2,4,0.5\n1,1,0.1\n");
    let s = read_xy_csv(&path).unwrap();
    assert_eq!(s.points()[0].x, 1.0);
    assert_eq!(s.points()[0].sigma, Some(0.1));
}

#[test]
fn simulated_spectrum_file_feeds_the_dip_fit() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("spectrum.csv");
    let nu0 = 3.819e14;
    let res = ResonatorParams::new(nu0, 320_000.0, 320_000.0, Transmittance::new(0.005).unwrap()).unwrap();
    let lw = res.linewidth();
    let rows: Vec<Vec<f64>> = (0..2001)
        .map(|k| {
            let f = nu0 + (k as f64 - 1000.0) / 200.0 * lw;
            vec![f, transmission_dip(f - nu0, &res).value()]
        })
        .collect();
    write_table_csv(&path, &["freq_hz", "transmission"], &rows).unwrap();
    let fit = fit_lorentzian_dip(&read_xy_csv(&path).unwrap()).unwrap();
    assert!((fit.q_loaded.value / 160_000.0 - 1.0).abs() < 1e-6);
}

#[test]
fn tag_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("tags.csv");
    let streams = TagStreams { signal: vec![0, 5, 5, 90], idler: vec![3, 5, 1 << 40] };
    write_tags_csv(&path, &streams).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("channel,time_ps\n0,0\n1,3\n0,5\n0,5\n1,5\n"));
    assert_eq!(read_tags_csv(&path).unwrap(), streams);
}

#[test]
fn tag_file_validation() {
    let dir = tempfile::tempdir().unwrap();
    let unsorted = write(dir.path(), "u.csv", "channel,time_ps\n0,10\n1,3\n0,4\n");
    assert!(matches!(
        read_tags_csv(&unsorted),
        Err(Error::Model(ringpair_core::Error::Unsorted { index: 1, .. }))
    ));
    let channel = write(dir.path(), "c.csv", "channel,time_ps\n0,10\n2,11\n");
    assert!(matches!(read_tags_csv(&channel), Err(Error::Parse { line: 3, .. })));
    let negative = write(dir.path(), "n.csv", "channel,time_ps\n0,-10\n");
    assert!(matches!(read_tags_csv(&negative), Err(Error::Parse { line: 2, .. })));
    let header = write(dir.path(), "h.csv", "chan,t\n0,10\n");
    assert!(matches!(read_tags_csv(&header), Err(Error::Parse { line: 1, .. })));
}

#[test]
fn failed_write_leaves_no_partial_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.csv");
    assert!(write_table_csv(&path, &["a", "b"], &[vec![1.0]]).is_err());
    assert!(!path.exists());
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 0);
}
