use uniton::golden::{grassmannian_uniton_one, random_f0, ThreeRowData, THREE_ROW_SEED};
use uniton::harmonic_builder::HarmonicBuilder;
use uniton::ratfun::C64;
use uniton::spectral_flow::{deform, deform_k, flow_family, limit_chains, write_flow_csv, FlowParam};
use uniton::uniton_array::{from_f0, ConstantLeftFactor};

const Z: C64 = C64::new(0.9, -0.6);

fn t(v: f64) -> FlowParam {
    FlowParam::new(v).unwrap()
}

#[test]
fn filled_array_flows_to_diagonal_chain() {
    let data = ThreeRowData::new(THREE_ROW_SEED);
    let diag = HarmonicBuilder::new(data.diagonal()).build_chain(Z).unwrap();
    let mut prev = f64::INFINITY;
    for &tv in &[1e-2, 1e-3, 1e-4] {
        let (at_t, limit) = limit_chains(&data.filled(), Z, t(tv), 1e-9).unwrap();
        assert!(limit.distance(&diag) < 1e-9);
        let d = at_t.distance(&diag);
        assert!(d < 10.0 * tv, "distance {d} at t = {tv}");
        assert!(d < prev);
        prev = d;
    }
}

#[test]
fn flow_rows_are_ordered_and_end_at_the_build() {
    let data = ThreeRowData::new(THREE_ROW_SEED);
    let arr = data.filled();
    let q = ConstantLeftFactor::identity(7);
    let zs = [Z, C64::new(-1.2, 0.4)];
    let grid = [t(1.0), t(0.25), t(0.5)];
    let rows = flow_family(&arr, &q, &grid, &zs, 1e-9, 1e-3).unwrap();
    let order: Vec<(f64, C64)> = rows.iter().map(|r| (r.t, r.z)).collect();
    let expected: Vec<(f64, C64)> = [0.25, 0.5, 1.0]
        .iter()
        .flat_map(|&tv| zs.iter().map(move |&z| (tv, z)))
        .collect();
    assert_eq!(order, expected);
    let phi = HarmonicBuilder::new(arr).evaluate_phi(&q, Z).unwrap();
    assert!((&rows[4].phi - &phi).norm_fro() < 1e-12);
    assert!(rows.iter().all(|r| r.unitarity < 1e-9));

    let mut buf = Vec::new();
    write_flow_csv(&rows, 7, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + rows.len());
    assert!(lines[0].starts_with("t,z_re,z_im,phi_0_0_re,phi_0_0_im"));
    assert_eq!(lines[0].split(',').count(), 3 + 2 * 49 + 3);
    assert!(lines[1..].iter().all(|l| l.split(',').count() == 3 + 2 * 49 + 3));
}

#[test]
fn uniton_one_table_is_constant() {
    let g = grassmannian_uniton_one(24);
    let grid = [t(0.1), t(0.5), t(1.0)];
    let rows = flow_family(&g.array, &g.q, &grid, &[Z], 1e-9, 1e-3).unwrap();
    for row in &rows[1..] {
        assert!((&row.phi - &rows[0].phi).norm_fro() < 1e-12);
    }
}

#[test]
fn deform_k_commutes_with_conversion() {
    for seed in 0..5 {
        let karr = random_f0(seed, 6, 2);
        let (q, arr) = from_f0(&karr).unwrap();
        for &tv in &[0.3, 0.8] {
            let (qt, arr_t) = from_f0(&deform_k(&karr, t(tv)).unwrap()).unwrap();
            assert!((qt.matrix() - q.matrix()).norm_fro() < 1e-12);
            let direct = HarmonicBuilder::new(deform(&arr, t(tv)).unwrap())
                .build_chain(Z)
                .unwrap();
            let via_k = HarmonicBuilder::new(arr_t).build_chain(Z).unwrap();
            assert!(direct.distance(&via_k) < 1e-8);
        }
    }
}
