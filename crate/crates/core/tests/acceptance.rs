//! Acceptance suite: one test per criterion, exact rational equality
//! throughout (tolerance zero), each printing a pass line on success.

mod common;

use common::{corpus, nonunique_instances, qv, qvr, random_instance, random_nested, staircase_1d};

use cpwl_core::cones::{
    cone_probed_subset_of_union, double_description, farkas_polarity_check, generated_eq,
    member_halfspace, GeneratedCone, GeneratedUnion,
};
use cpwl_core::cpwl::{index_set, CpwlFunction};
use cpwl_core::exactla::{rat, rat_int, QVector, Rational};
use cpwl_core::graphgeo::{self, GraphPoint};
use cpwl_core::oracle::{self, union_eq_probed};
use cpwl_core::{closedforms, secondorder};

use num_traits::{One, Signed, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn graph_points(f: &CpwlFunction) -> Vec<GraphPoint> {
    oracle::sample_graph_points(f)
        .unwrap()
        .into_iter()
        .map(|(x, v)| GraphPoint::new(f, x, v).unwrap())
        .collect()
}

/// Spanning directions of the second-order domain subspace: the basis, its
/// negation, zero, and one combination.
fn spanning_directions(f: &CpwlFunction, g: &GraphPoint) -> Vec<QVector> {
    let basis = secondorder::second_order_domain_basis(f, g).unwrap();
    let mut out = vec![QVector::zero(f.dim())];
    for b in &basis {
        out.push(b.clone());
        out.push(b.neg());
    }
    if basis.len() >= 2 {
        out.push(basis[0].add(&basis[1]));
    }
    out
}

/// Two-sided set equality between a value union and a convex cone: exact
/// containment of every member in the cone, probe-based containment of the
/// cone in the union.
fn union_matches_cone(
    union: &GeneratedUnion,
    cone: &GeneratedCone,
    rng: &mut ChaCha8Rng,
) -> bool {
    union.subset_of_generated(cone).unwrap()
        && cone_probed_subset_of_union(cone, union, rng, 8).unwrap()
}

#[test]
fn criterion_01_reference_instance_regression() {
    let started = std::time::Instant::now();
    let f = staircase_1d();
    let x = qv(&[1]);

    let sd = f.subdifferential(&x).unwrap();
    assert_eq!(sd.hull_points, vec![qvr(&[(1, 2)]), qv(&[2])]);
    assert!(sd.ray_gens.is_empty());
    assert!(sd.contains(&qv(&[1])).unwrap());
    assert!(!sd.contains(&qvr(&[(49, 100)])).unwrap());
    assert!(!sd.contains(&qvr(&[(201, 100)])).unwrap());

    let g = GraphPoint::new(&f, x.clone(), qv(&[1])).unwrap();
    assert_eq!(g.witness.lambda[&0], rat(2, 3));
    assert_eq!(g.witness.lambda[&1], rat(1, 3));
    assert_eq!(g.witness.j1, index_set(&[0, 1]));
    assert_eq!(g.witness.j2, index_set(&[]));

    let product = graphgeo::prenormal_cone_graph(&f, &g).unwrap();
    let whole_line = GeneratedCone::new(vec![qv(&[1])], vec![], 1);
    assert!(generated_eq(&product.first, &whole_line).unwrap());
    let second = double_description(&product.second).unwrap();
    assert!(generated_eq(&second, &GeneratedCone::origin(1)).unwrap());

    let domain = secondorder::second_order_domain(&f, &g).unwrap();
    assert!(member_halfspace(&qv(&[0]), &domain).unwrap());
    assert!(!member_halfspace(&qv(&[1]), &domain).unwrap());
    assert!(!member_halfspace(&qv(&[-1]), &domain).unwrap());

    let value = secondorder::second_order_value(&f, &g, &qv(&[0])).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    assert!(union_matches_cone(&value, &whole_line, &mut rng));

    assert!(started.elapsed() < std::time::Duration::from_secs(1));
    println!(
        "PASS criterion 1: reference instance regression in {:?}",
        started.elapsed()
    );
}

#[test]
fn criterion_02_farkas_polarity_suite() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut checked = 0usize;
    while checked < 200 {
        let f = random_instance(&mut rng);
        let (p1, q1) = random_nested(&mut rng, f.pieces().len());
        let (p2, q2) = random_nested(&mut rng, f.constraints().len());
        let p1 = p1.into_iter().collect();
        let q1 = q1.into_iter().collect();
        let p2 = p2.into_iter().collect();
        let q2 = q2.into_iter().collect();
        assert!(
            farkas_polarity_check(&f, &p1, &q1, &p2, &q2).unwrap(),
            "polarity identity failed on configuration {checked}"
        );
        checked += 1;
    }
    assert!(started.elapsed() < std::time::Duration::from_secs(30));
    println!(
        "PASS criterion 2: Farkas polarity identity on {checked} random configurations in {:?}",
        started.elapsed()
    );
}

#[test]
fn criterion_03_prenormal_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut instances = 0usize;
    let mut points = 0usize;
    for (name, f) in corpus() {
        let strata = oracle::graph_strata(&f).unwrap();
        let gps = graph_points(&f);
        assert!(gps.len() >= 5, "{name}: only {} graph points", gps.len());
        for g in &gps {
            let product = graphgeo::prenormal_cone_graph(&f, g).unwrap();
            let oracle_h = oracle::prenormal_oracle_with(&strata, f.dim(), &g.x, &g.v).unwrap();
            assert!(
                generated_eq(
                    &product.to_generated().unwrap(),
                    &double_description(&oracle_h).unwrap()
                )
                .unwrap(),
                "{name}: prenormal mismatch at {:?} {:?}",
                g.x,
                g.v
            );
            // the factors agree with the active-row cones of the oracle
            // H-representation of the subgradient set
            let hrep = oracle::subgradient_polyhedron_hrep(&f, &g.x).unwrap();
            let oracle_normal = oracle::normal_cone_from_hrep(&hrep, &g.v).unwrap();
            let formula_normal = graphgeo::normal_cone_at_subgradient(&f, g).unwrap();
            assert!(
                generated_eq(&oracle_normal, &double_description(&formula_normal).unwrap())
                    .unwrap(),
                "{name}: subgradient-set normal cone mismatch"
            );
            let oracle_tangent = cpwl_core::cones::polar_of_generated(&oracle_normal);
            assert!(
                generated_eq(&product.first, &double_description(&oracle_tangent).unwrap())
                    .unwrap(),
                "{name}: subgradient-set tangent cone mismatch"
            );
            points += 1;
        }
        instances += 1;
    }
    assert!(instances >= 20);
    assert!(started.elapsed() < std::time::Duration::from_secs(60));
    println!(
        "PASS criterion 3: prenormal cone equals oracle on {points} graph points across {instances} instances in {:?}",
        started.elapsed()
    );
}

#[test]
fn criterion_04_limiting_oracle_equivalence() {
    let started = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut points = 0usize;
    for (name, f) in corpus() {
        let strata = oracle::graph_strata(&f).unwrap();
        for g in graph_points(&f) {
            let formula = secondorder::limiting_normal_cone(&f, &g).unwrap();
            let oracle_union =
                oracle::limiting_oracle_with(&strata, f.dim(), &g.x, &g.v).unwrap();
            assert!(
                union_eq_probed(&formula, &oracle_union, 2 * f.dim(), &mut rng, 50).unwrap(),
                "{name}: limiting cone mismatch at {:?} {:?}",
                g.x,
                g.v
            );
            points += 1;
        }
    }
    assert!(started.elapsed() < std::time::Duration::from_secs(300));
    println!(
        "PASS criterion 4: limiting normal cone equals oracle on {points} graph points (50 probes each) in {:?}",
        started.elapsed()
    );
}

fn family_instances() -> Vec<(&'static str, CpwlFunction)> {
    vec![
        ("cmax_2", CpwlFunction::component_max(2)),
        ("cmax_3", CpwlFunction::component_max(3)),
        ("infnorm_2", CpwlFunction::inf_norm(2)),
        ("box_2", CpwlFunction::box_indicator(2)),
        ("onenorm_1", CpwlFunction::one_norm(1)),
        ("onenorm_2", CpwlFunction::one_norm(2)),
    ]
}

#[test]
fn criterion_05_second_order_domain_identity() {
    let mut checked = 0usize;
    for (name, f) in corpus().into_iter().chain(family_instances()) {
        for g in graph_points(&f) {
            let domain = secondorder::second_order_domain(&f, &g).unwrap();
            let basis = secondorder::second_order_domain_basis(&f, &g).unwrap();
            for b in &basis {
                for u in [b.clone(), b.neg()] {
                    assert!(
                        !secondorder::second_order_value(&f, &g, &u)
                            .unwrap()
                            .is_empty_union(),
                        "{name}: basis direction outside the attained domain"
                    );
                }
            }
            if basis.len() >= 2 {
                let combo = basis[0].add(&basis[1].scale(&rat(2, 3)));
                assert!(!secondorder::second_order_value(&f, &g, &combo)
                    .unwrap()
                    .is_empty_union());
            }
            for quad in secondorder::enumerate_a(&f, &g).unwrap() {
                let cone_g = graphgeo::build_g(&f, &quad.p1, &quad.q1, &quad.p2, &quad.q2).unwrap();
                let gens = double_description(&cone_g).unwrap();
                for gen in gens.closure_generators() {
                    assert!(
                        member_halfspace(&gen.neg(), &domain).unwrap(),
                        "{name}: a quadruple cone leaves the domain subspace"
                    );
                }
            }
            checked += 1;
        }
    }
    println!("PASS criterion 5: second-order domain two-sided identity on {checked} graph points");
}

#[test]
fn criterion_06_upper_estimate_soundness() {
    let mut checked = 0usize;
    for (name, f) in corpus().into_iter().chain(family_instances()) {
        for g in graph_points(&f) {
            for u in spanning_directions(&f, &g) {
                let union = secondorder::second_order_value(&f, &g, &u).unwrap();
                let bound = secondorder::value_upper_estimate(&f, &g, &u).unwrap();
                assert!(
                    union.subset_of_generated(&bound).unwrap(),
                    "{name}: estimate misses a union member"
                );
                checked += 1;
            }
        }
    }
    println!("PASS criterion 6: upper estimate contains every value member ({checked} directions)");
}

#[test]
fn criterion_07_aiqc_exactness_and_sum_rule() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut exact_points = 0usize;
    for (name, f) in corpus() {
        for g in graph_points(&f) {
            if !secondorder::aiqc(&f, &g.x).unwrap() {
                continue;
            }
            let features = secondorder::feature_sets(&f, &g).unwrap();
            assert_eq!(features.gamma1, g.witness.j1, "{name}: features exceed J1");
            assert_eq!(features.gamma2, g.witness.j2, "{name}: features exceed J2");
            for u in spanning_directions(&f, &g) {
                let exact = secondorder::value_exact(&f, &g, &u).unwrap();
                let union = secondorder::second_order_value(&f, &g, &u).unwrap();
                assert!(
                    union.subset_of_generated(&exact).unwrap(),
                    "{name}: union member escapes the exact cone"
                );
                let w = secondorder::witness_quadruple(&f, &g, &u).unwrap();
                let family = secondorder::enumerate_a(&f, &g).unwrap();
                assert!(family.contains(&w), "{name}: witness quadruple missing");
                let rebuilt = graphgeo::build_f(&f, &w.p1, &w.q1, &w.p2, &w.q2).unwrap();
                assert!(
                    generated_eq(&rebuilt, &exact).unwrap(),
                    "{name}: witness quadruple does not rebuild the exact cone"
                );
                assert!(
                    union_matches_cone(&union, &exact, &mut rng),
                    "{name}: exact value differs from the union"
                );
                assert!(
                    secondorder::sum_rule_check(&f, &g, &u).unwrap(),
                    "{name}: sum rule fails"
                );
            }
            exact_points += 1;
        }
    }
    assert!(exact_points > 0);
    println!("PASS criterion 7: exact values and sum rule under the qualification on {exact_points} graph points");
}

fn simplex_grid(n: usize) -> Vec<QVector> {
    // nonnegative rational vectors with denominator 4 summing to one
    let mut out = Vec::new();
    let mut counts = vec![0i64; n];
    fn rec(i: usize, left: i64, counts: &mut Vec<i64>, out: &mut Vec<QVector>) {
        if i + 1 == counts.len() {
            counts[i] = left;
            out.push(QVector::new(
                counts.iter().map(|&c| rat(c, 4)).collect(),
            ));
            return;
        }
        for c in 0..=left {
            counts[i] = c;
            rec(i + 1, left - c, counts, out);
        }
    }
    rec(0, 4, &mut counts, &mut out);
    out
}

#[test]
fn criterion_08_closed_form_cross_validation() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    // component maximum, n = 2 and 3, every denominator-4 subgradient
    for n in [2usize, 3] {
        let f = CpwlFunction::component_max(n);
        let x = QVector::zero(n);
        for v in simplex_grid(n) {
            let g = GraphPoint::new(&f, x.clone(), v.clone()).unwrap();
            for u in spanning_directions(&f, &g) {
                let closed = closedforms::component_max_value(&x, &v, &u).unwrap();
                let closed_v = double_description(&closed).unwrap();
                let union = secondorder::second_order_value(&f, &g, &u).unwrap();
                assert!(
                    union_matches_cone(&union, &closed_v, &mut rng),
                    "component max n={n} v={v:?} u={u:?}"
                );
            }
        }
        // a base point with an inactive coordinate (needs n >= 3 so that
        // two pieces stay active)
        if n >= 3 {
            let mut shifted = vec![0i64; n];
            shifted[n - 1] = -1;
            let x2 = qv(&shifted);
            let mut v2 = vec![Rational::zero(); n];
            v2[0] = rat(1, 2);
            v2[1] = rat(1, 2);
            let v2 = QVector::new(v2);
            let g = GraphPoint::new(&f, x2.clone(), v2.clone()).unwrap();
            for u in spanning_directions(&f, &g) {
                let closed = closedforms::component_max_value(&x2, &v2, &u).unwrap();
                let closed_v = double_description(&closed).unwrap();
                let union = secondorder::second_order_value(&f, &g, &u).unwrap();
                assert!(union_matches_cone(&union, &closed_v, &mut rng));
            }
        }
    }

    // sup-norm at the origin, n = 2, all boundary sign patterns with
    // denominators <= 4
    let f = CpwlFunction::inf_norm(2);
    let origin = QVector::zero(2);
    let mut boundary: Vec<QVector> = vec![qv(&[1, 0]), qv(&[-1, 0]), qv(&[0, 1]), qv(&[0, -1])];
    for a_num in [1i64, 2, 3] {
        for s in [1i64, -1] {
            for t in [1i64, -1] {
                boundary.push(QVector::new(vec![rat(s * a_num, 4), rat(t * (4 - a_num), 4)]));
            }
        }
    }
    for v in &boundary {
        assert!(
            !secondorder::aiqc(&f, &origin).unwrap(),
            "qualification unexpectedly holds for the sup-norm at the origin"
        );
        let g = GraphPoint::new(&f, origin.clone(), v.clone()).unwrap();
        let closed_domain = closedforms::inf_norm_domain(v).unwrap();
        let pipeline_domain = secondorder::second_order_domain(&f, &g).unwrap();
        assert!(cpwl_core::cones::halfspace_eq(&closed_domain, &pipeline_domain).unwrap());
        for u in spanning_directions(&f, &g) {
            let (bound, exact_flag) = closedforms::inf_norm_value_bound(v, &u).unwrap();
            let union = secondorder::second_order_value(&f, &g, &u).unwrap();
            assert!(
                union.subset_of_generated(&bound).unwrap(),
                "sup-norm bound misses a member at v={v:?} u={u:?}"
            );
            if exact_flag {
                assert!(
                    cone_probed_subset_of_union(&bound, &union, &mut rng, 8).unwrap(),
                    "flagged equality fails at v={v:?} u={u:?}"
                );
            }
        }
    }

    // box indicator, n = 2, all faces
    let f = CpwlFunction::box_indicator(2);
    let mut face_points: Vec<QVector> = Vec::new();
    for s in [1i64, -1] {
        for c in [(0i64, 1i64), (1, 2), (-1, 2), (1, 1), (-1, 1)] {
            face_points.push(QVector::new(vec![rat(s, 1), rat(c.0, c.1)]));
            face_points.push(QVector::new(vec![rat(c.0, c.1), rat(s, 1)]));
        }
    }
    for base in &face_points {
        let mut normals: Vec<QVector> = vec![QVector::zero(2)];
        let active: Vec<usize> = (0..2).filter(|&i| base[i].abs() == Rational::one()).collect();
        for &i in &active {
            let e = QVector::unit(2, i).scale(&base[i]);
            normals.push(e.clone());
            normals.push(e.scale(&rat_int(3)));
        }
        if active.len() == 2 {
            let total = active
                .iter()
                .fold(QVector::zero(2), |acc, &i| acc.add(&QVector::unit(2, i).scale(&base[i])));
            normals.push(total);
        }
        for normal in normals {
            let g = GraphPoint::new(&f, base.clone(), normal.clone()).unwrap();
            let basis = secondorder::second_order_domain_basis(&f, &g).unwrap();
            let mut directions = vec![QVector::zero(2)];
            for b in &basis {
                directions.push(b.clone());
                directions.push(b.neg());
            }
            for u in directions {
                let (closed_domain, closed_value, _) =
                    closedforms::box_indicator_domain_and_value(base, &normal, &u).unwrap();
                let pipeline_domain = secondorder::second_order_domain(&f, &g).unwrap();
                assert!(cpwl_core::cones::halfspace_eq(&closed_domain, &pipeline_domain).unwrap());
                let union = secondorder::second_order_value(&f, &g, &u).unwrap();
                assert!(
                    union_matches_cone(&union, &closed_value, &mut rng),
                    "box value mismatch at base={base:?} normal={normal:?} u={u:?}"
                );
            }
        }
    }

    // 1-norm, n = 1 and 2
    let one_norm_points: Vec<(usize, QVector, QVector)> = vec![
        (1, qv(&[0]), qv(&[1])),
        (1, qv(&[0]), qv(&[-1])),
        (1, qv(&[0]), qvr(&[(1, 2)])),
        (1, qv(&[0]), qv(&[0])),
        (1, qv(&[2]), qv(&[1])),
        (1, qv(&[-3]), qv(&[-1])),
        (2, qv(&[0, 0]), qv(&[1, 1])),
        (2, qv(&[0, 0]), qv(&[1, -1])),
        (2, qv(&[0, 0]), qvr(&[(1, 1), (1, 2)])),
        (2, qv(&[0, 0]), qvr(&[(1, 4), (-1, 2)])),
        (2, qv(&[1, 0]), qv(&[1, 1])),
        (2, qv(&[1, 0]), qvr(&[(1, 1), (-1, 2)])),
        (2, qv(&[2, -1]), qv(&[1, -1])),
    ];
    for (n, x, v) in one_norm_points {
        let f = CpwlFunction::one_norm(n);
        let g = GraphPoint::new(&f, x.clone(), v.clone()).unwrap();
        let pipeline_domain = secondorder::second_order_domain(&f, &g).unwrap();
        let basis = secondorder::second_order_domain_basis(&f, &g).unwrap();
        let mut directions = vec![QVector::zero(n)];
        for b in &basis {
            directions.push(b.clone());
            directions.push(b.neg());
        }
        for w in directions {
            let (closed_domain, closed_value, _) =
                closedforms::one_norm_domain_and_value(&x, &v, &w).unwrap();
            assert!(cpwl_core::cones::halfspace_eq(&closed_domain, &pipeline_domain).unwrap());
            let closed_v = double_description(&closed_value).unwrap();
            let union = secondorder::second_order_value(&f, &g, &w).unwrap();
            assert!(
                union_matches_cone(&union, &closed_v, &mut rng),
                "1-norm value mismatch at x={x:?} v={v:?} w={w:?}"
            );
            // conjugacy flip agrees on probes
            for u in cpwl_core::cones::probe_points(
                &closed_v.closure_generators(),
                n,
                &mut rng,
                4,
            ) {
                assert_eq!(
                    member_halfspace(&u, &closed_value).unwrap(),
                    closedforms::one_norm_member_via_box(&x, &v, &w, &u).unwrap()
                );
            }
        }
    }

    println!("PASS criterion 8: closed forms agree with the general pipeline (component max, sup-norm, box, 1-norm)");
}

#[test]
fn criterion_09_decomposition_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let instances = nonunique_instances();
    assert!(instances.len() >= 10);
    let mut checked = 0usize;
    for (name, f) in instances {
        for g in graph_points(&f) {
            assert!(
                graphgeo::invariance_check(&f, &g, 5, &mut rng).unwrap(),
                "{name}: derived cones depend on the decomposition at {:?} {:?}",
                g.x,
                g.v
            );
            checked += 1;
        }
    }
    println!("PASS criterion 9: invariance under randomized decompositions on {checked} graph points");
}

#[test]
fn criterion_10_local_structure() {
    let two = Rational::from_integer(2.into());
    let mut checked = 0usize;
    for (name, f) in corpus() {
        let strata = oracle::graph_strata(&f).unwrap();
        for g in graph_points(&f) {
            let radius = f.safe_radius(&g.x).unwrap();
            let outer = f.subdifferential(&g.x).unwrap();
            for s in strata.iter().filter(|s| s.contains(&g.x, &g.v)) {
                let hull: Vec<QVector> = s.q1.iter().map(|&i| f.piece(i).0.clone()).collect();
                for target in hull.iter().chain(std::iter::once(&g.v)) {
                    let dx = s.witness_x.sub(&g.x);
                    let dv = target.sub(&g.v);
                    let gap = Rational::one() + dx.norm1() + dv.norm1();
                    let t = &radius / (&two * gap);
                    let x_near = g.x.add(&dx.scale(&t));
                    let v_near = g.v.add(&dv.scale(&t));
                    assert!(
                        f.is_subgradient(&x_near, &v_near).unwrap(),
                        "{name}: stratum segment left the graph"
                    );
                    let inner = f.subdifferential(&x_near).unwrap();
                    assert!(
                        inner.subset_of(&outer).unwrap(),
                        "{name}: nearby subdifferential escapes"
                    );
                    for &i in &g.witness.j1 {
                        assert!(
                            f.in_cell(i, &x_near).unwrap(),
                            "{name}: nearby graph point leaves a positive-multiplier cell"
                        );
                    }
                    checked += 1;
                }
            }
        }
    }
    println!("PASS criterion 10: local structure (subdifferential containment and cell membership) on {checked} nearby points");
}

#[test]
fn criterion_11_difference_identity() {
    let mut checked = 0usize;
    for (name, f) in corpus() {
        for g in graph_points(&f) {
            assert!(
                secondorder::difference_identity_check(&f, &g).unwrap(),
                "{name}: difference identity fails at {:?} {:?}",
                g.x,
                g.v
            );
            checked += 1;
        }
    }
    println!("PASS criterion 11: difference identity on {checked} graph points");
}
