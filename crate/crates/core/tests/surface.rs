use rpr_cusps::cusp::CuspMode;
use rpr_cusps::geometry::ManipulatorGeometry;
use rpr_cusps::surface::{export_mesh, stabilization, sweep_samples, MeshFormat, SweepOptions, STABLE_RUN};

#[test]
fn mesh_indices_stay_in_range() {
    let g = ManipulatorGeometry::second_example();
    let opts = SweepOptions {
        resolution: 256,
        ..SweepOptions::default()
    };
    let s = sweep_samples(&g, &[2.0, 2.5, 3.0, 3.5], &opts).unwrap();
    assert_eq!(s.rho1_samples(), vec![2.0, 2.5, 3.0, 3.5]);
    let mut buf = Vec::new();
    let stats = export_mesh(&s, MeshFormat::Obj, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();

    let verts: Vec<[f64; 3]> = text
        .lines()
        .filter_map(|l| l.strip_prefix("v "))
        .map(|l| {
            let x: Vec<f64> = l.split(' ').map(|t| t.parse().unwrap()).collect();
            [x[0], x[1], x[2]]
        })
        .collect();
    assert_eq!(verts.len(), stats.vertices);
    assert_eq!(verts.len(), s.vertex_count());
    assert!(verts.iter().all(|v| s.rho1_samples().contains(&v[0])));

    let index_ok = |l: &str| {
        l.split(' ')
            .skip(1)
            .all(|t| (1..=verts.len()).contains(&t.parse::<usize>().unwrap()))
    };
    let lines: Vec<&str> = text.lines().filter(|l| l.starts_with("l ")).collect();
    let faces: Vec<&str> = text.lines().filter(|l| l.starts_with("f ")).collect();
    assert_eq!(lines.len(), stats.polylines);
    assert_eq!(faces.len(), stats.triangles);
    assert!(lines.iter().chain(&faces).all(|l| index_ok(l)));
    assert!(stats.stitched >= 1 && stats.triangles > 0);

    // Triangles join neighbouring slices only.
    let rho1s = s.rho1_samples();
    for f in &faces {
        let mut xs: Vec<f64> = f
            .split(' ')
            .skip(1)
            .map(|t| verts[t.parse::<usize>().unwrap() - 1][0])
            .collect();
        xs.dedup();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        assert_eq!(xs.len(), 2, "{f}");
        let k = rho1s.iter().position(|&r| r == xs[0]).unwrap();
        assert_eq!(rho1s[k + 1], xs[1]);
    }
}

#[test]
fn transitions_follow_counts() {
    let g = ManipulatorGeometry::reference();
    let opts = SweepOptions {
        resolution: 256,
        cusp: rpr_cusps::cusp::CuspOptions {
            mode: CuspMode::Algebraic,
            ..Default::default()
        },
    };
    let s = sweep_samples(&g, &[1.0, 2.8, 17.0, 40.0], &opts).unwrap();
    assert_eq!(s.cusp_counts(), vec![2, 4, 6, 4]);
    assert_eq!(
        s.transitions(),
        vec![(1.0, 2.8, 2, 4), (2.8, 17.0, 4, 6), (17.0, 40.0, 6, 4)]
    );
    assert_eq!(s.stabilization_threshold, None);
}

#[test]
fn stabilization_threshold_is_start_of_final_run() {
    let r: Vec<f64> = (0..10).map(f64::from).collect();
    let mut c = vec![6; 10];
    for x in c.iter_mut().take(10 - STABLE_RUN) {
        *x = 4;
    }
    assert_eq!(stabilization(&r, &c), Some((10 - STABLE_RUN) as f64));
    c[10 - STABLE_RUN] = 4;
    assert_eq!(stabilization(&r, &c), None);
}

#[test]
fn empty_sweep_is_rejected() {
    let g = ManipulatorGeometry::reference();
    assert!(sweep_samples(&g, &[], &SweepOptions::default()).is_err());
}
