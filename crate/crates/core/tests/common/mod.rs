//! Shared corpus for the acceptance suite: handcrafted low-dimensional
//! instances covering kinks, domain faces, redundant representations and
//! the closed-form families.

// each integration test binary compiles this module and uses its own slice
#![allow(dead_code)]

use cpwl_core::cpwl::CpwlFunction;
use cpwl_core::exactla::{rat, QVector, Rational};
use rand::Rng;

pub fn qv(entries: &[i64]) -> QVector {
    QVector::from_ints(entries)
}

pub fn qvr(entries: &[(i64, i64)]) -> QVector {
    QVector::new(entries.iter().map(|&(p, q)| rat(p, q)).collect())
}

type RowData<'a> = (&'a [(i64, i64)], (i64, i64));

fn pieces(list: &[RowData<'_>]) -> Vec<(QVector, Rational)> {
    list.iter()
        .map(|(a, (p, q))| (qvr(a), rat(*p, *q)))
        .collect()
}

fn make(piece_list: &[RowData<'_>], constraint_list: &[RowData<'_>], dim: usize) -> CpwlFunction {
    CpwlFunction::new(pieces(piece_list), pieces(constraint_list), dim).unwrap()
}

/// Three affine pieces (slopes 1/2, 2, -1) on the box [-2, 2]: kinks at 0
/// and 1, domain corners at -2 and 2.
pub fn staircase_1d() -> CpwlFunction {
    make(
        &[
            (&[(1, 2)], (0, 1)),
            (&[(2, 1)], (3, 2)),
            (&[(-1, 1)], (0, 1)),
        ],
        &[(&[(1, 1)], (2, 1)), (&[(-1, 1)], (2, 1))],
        1,
    )
}

/// The oracle-comparison corpus: 22 instances in dimension one and two.
pub fn corpus() -> Vec<(&'static str, CpwlFunction)> {
    vec![
        ("staircase_1d", staircase_1d()),
        (
            "abs_1d",
            make(&[(&[(1, 1)], (0, 1)), (&[(-1, 1)], (0, 1))], &[], 1),
        ),
        (
            "abs_box_1d",
            make(
                &[(&[(1, 1)], (0, 1)), (&[(-1, 1)], (0, 1))],
                &[(&[(1, 1)], (1, 1)), (&[(-1, 1)], (1, 1))],
                1,
            ),
        ),
        (
            "relu_1d",
            make(&[(&[(0, 1)], (0, 1)), (&[(1, 1)], (0, 1))], &[], 1),
        ),
        (
            "interval_indicator_1d",
            make(
                &[(&[(0, 1)], (0, 1))],
                &[(&[(1, 1)], (1, 1)), (&[(-1, 1)], (1, 1))],
                1,
            ),
        ),
        (
            "affine_box_1d",
            make(
                &[(&[(3, 2)], (1, 2))],
                &[(&[(1, 1)], (1, 1)), (&[(-1, 1)], (2, 1))],
                1,
            ),
        ),
        (
            "slopes_1d",
            make(
                &[
                    (&[(0, 1)], (0, 1)),
                    (&[(1, 2)], (0, 1)),
                    (&[(3, 1)], (5, 1)),
                ],
                &[(&[(1, 1)], (5, 2))],
                1,
            ),
        ),
        (
            "duplicate_pieces_1d",
            make(
                &[
                    (&[(1, 1)], (0, 1)),
                    (&[(1, 1)], (0, 1)),
                    (&[(0, 1)], (0, 1)),
                ],
                &[],
                1,
            ),
        ),
        (
            "duplicate_constraints_1d",
            make(
                &[(&[(1, 1)], (0, 1))],
                &[
                    (&[(1, 1)], (1, 1)),
                    (&[(1, 1)], (1, 1)),
                    (&[(-1, 1)], (1, 1)),
                ],
                1,
            ),
        ),
        ("cmax_2d", CpwlFunction::component_max(2)),
        ("infnorm_2d", CpwlFunction::inf_norm(2)),
        ("onenorm_2d", CpwlFunction::one_norm(2)),
        ("box_2d", CpwlFunction::box_indicator(2)),
        (
            "simplex_support_2d",
            make(
                &[
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                    (&[(-1, 1), (-1, 1)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "relu_sum_2d",
            make(
                &[
                    (&[(0, 1), (0, 1)], (0, 1)),
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                    (&[(1, 1), (1, 1)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "triangle_indicator_2d",
            make(
                &[(&[(0, 1), (0, 1)], (0, 1))],
                &[
                    (&[(1, 1), (1, 1)], (1, 1)),
                    (&[(-1, 1), (0, 1)], (1, 1)),
                    (&[(0, 1), (-1, 1)], (1, 1)),
                ],
                2,
            ),
        ),
        (
            "wedge_indicator_2d",
            make(
                &[(&[(0, 1), (0, 1)], (0, 1))],
                &[
                    (&[(-1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (-1, 1)], (0, 1)),
                ],
                2,
            ),
        ),
        (
            "tilted_2d",
            make(
                &[
                    (&[(1, 2), (1, 3)], (0, 1)),
                    (&[(2, 1), (-1, 1)], (1, 1)),
                    (&[(-1, 1), (0, 1)], (1, 2)),
                ],
                &[],
                2,
            ),
        ),
        (
            "cmax_box_2d",
            make(
                &[(&[(1, 1), (0, 1)], (0, 1)), (&[(0, 1), (1, 1)], (0, 1))],
                &[
                    (&[(1, 1), (0, 1)], (1, 1)),
                    (&[(0, 1), (1, 1)], (1, 1)),
                    (&[(-1, 1), (0, 1)], (1, 1)),
                    (&[(0, 1), (-1, 1)], (1, 1)),
                ],
                2,
            ),
        ),
        (
            "interior_point_2d",
            make(
                &[
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                    (&[(1, 3), (1, 3)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "strip_2d",
            make(
                &[(&[(1, 1), (0, 1)], (0, 1))],
                &[(&[(0, 1), (1, 1)], (1, 1)), (&[(0, 1), (-1, 1)], (1, 1))],
                2,
            ),
        ),
        (
            "vee_2d",
            make(
                &[(&[(0, 1), (1, 1)], (0, 1)), (&[(0, 1), (-1, 1)], (0, 1))],
                &[(&[(-1, 1), (0, 1)], (0, 1))],
                2,
            ),
        ),
        // opposite constraints trap the domain in a line, so the domain
        // normal cones carry genuine lineality
        (
            "pinched_line_2d",
            make(
                &[(&[(1, 1), (0, 1)], (0, 1))],
                &[
                    (&[(0, 1), (1, 1)], (1, 1)),
                    (&[(0, 1), (-1, 1)], (-1, 1)),
                    (&[(1, 1), (0, 1)], (2, 1)),
                ],
                2,
            ),
        ),
    ]
}

/// Instances engineered for non-unique multipliers: duplicated rows and
/// interior hull points.
pub fn nonunique_instances() -> Vec<(&'static str, CpwlFunction)> {
    let out: Vec<(&'static str, CpwlFunction)> = vec![
        (
            "dup_pieces_1d",
            make(
                &[
                    (&[(1, 1)], (0, 1)),
                    (&[(1, 1)], (0, 1)),
                    (&[(0, 1)], (0, 1)),
                ],
                &[],
                1,
            ),
        ),
        (
            "dup_constraints_1d",
            make(
                &[(&[(1, 1)], (0, 1))],
                &[
                    (&[(1, 1)], (1, 1)),
                    (&[(1, 1)], (1, 1)),
                    (&[(-1, 1)], (1, 1)),
                ],
                1,
            ),
        ),
        (
            "interior_point_2d",
            make(
                &[
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                    (&[(1, 3), (1, 3)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "dup_cmax_2d",
            make(
                &[
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "dup_box_2d",
            make(
                &[(&[(0, 1), (0, 1)], (0, 1))],
                &[
                    (&[(1, 1), (0, 1)], (1, 1)),
                    (&[(1, 1), (0, 1)], (1, 1)),
                    (&[(0, 1), (1, 1)], (1, 1)),
                    (&[(-1, 1), (0, 1)], (1, 1)),
                    (&[(0, 1), (-1, 1)], (1, 1)),
                ],
                2,
            ),
        ),
        (
            "abs_with_zero_piece_1d",
            make(
                &[
                    (&[(1, 1)], (0, 1)),
                    (&[(-1, 1)], (0, 1)),
                    (&[(0, 1)], (0, 1)),
                ],
                &[],
                1,
            ),
        ),
        (
            "simplex_with_barycenter_2d",
            make(
                &[
                    (&[(1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (1, 1)], (0, 1)),
                    (&[(-1, 1), (-1, 1)], (0, 1)),
                    (&[(0, 1), (0, 1)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
        (
            "dup_wedge_2d",
            make(
                &[(&[(0, 1), (0, 1)], (0, 1))],
                &[
                    (&[(-1, 1), (0, 1)], (0, 1)),
                    (&[(-1, 1), (0, 1)], (0, 1)),
                    (&[(0, 1), (-1, 1)], (0, 1)),
                ],
                2,
            ),
        ),
        (
            "scaled_dup_halfline_1d",
            make(
                &[(&[(0, 1)], (0, 1))],
                &[(&[(1, 1)], (0, 1)), (&[(2, 1)], (0, 1))],
                1,
            ),
        ),
        (
            "onenorm_with_center_2d",
            make(
                &[
                    (&[(1, 1), (1, 1)], (0, 1)),
                    (&[(1, 1), (-1, 1)], (0, 1)),
                    (&[(-1, 1), (1, 1)], (0, 1)),
                    (&[(-1, 1), (-1, 1)], (0, 1)),
                    (&[(0, 1), (0, 1)], (0, 1)),
                ],
                &[],
                2,
            ),
        ),
    ];
    assert!(out.len() >= 10);
    out
}

/// Random small instance for the Farkas suite; retries until the domain is
/// nonempty.
pub fn random_instance<R: Rng>(rng: &mut R) -> CpwlFunction {
    let dim = rng.random_range(1..=4usize);
    random_instance_with(rng, dim, 4, 3)
}

/// Random instance with bounded shape, for randomized pipeline checks.
pub fn random_instance_with<R: Rng>(
    rng: &mut R,
    dim: usize,
    max_pieces: usize,
    max_constraints: usize,
) -> CpwlFunction {
    loop {
        let n_pieces = rng.random_range(1..=max_pieces);
        let n_constraints = rng.random_range(0..=max_constraints);
        let rat_entry = |rng: &mut R| {
            rat(rng.random_range(-2i64..=2), rng.random_range(1i64..=2))
        };
        let mut piece_list = Vec::new();
        for _ in 0..n_pieces {
            let a = QVector::new((0..dim).map(|_| rat_entry(rng)).collect());
            piece_list.push((a, rat_entry(rng)));
        }
        let mut constraint_list = Vec::new();
        for _ in 0..n_constraints {
            let d = QVector::new((0..dim).map(|_| rat_entry(rng)).collect());
            // keep the origin feasible so the domain is never empty
            let beta = rat(rng.random_range(0i64..=2), 1);
            constraint_list.push((d, beta));
        }
        if let Ok(f) = CpwlFunction::new(piece_list, constraint_list, dim) {
            return f;
        }
    }
}

/// Random nested index pair inside `0..universe`.
pub fn random_nested<R: Rng>(rng: &mut R, universe: usize) -> (Vec<usize>, Vec<usize>) {
    let mut q = Vec::new();
    for i in 0..universe {
        if rng.random_bool(0.6) {
            q.push(i);
        }
    }
    let p = q
        .iter()
        .copied()
        .filter(|_| rng.random_bool(0.6))
        .collect();
    (p, q)
}
