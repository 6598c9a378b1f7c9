use proptest::prelude::*;

use metrifill::complex::MetricGraph;
use metrifill::geometry::{grid_decompose, PlanarPolygon, Point2};
use metrifill::modulus::{discrete_modulus, path_graph, ModulusProblem};
use metrifill::triangle::{
    ambient_triangle, embed_triangle, reconstruct, sector_decompose, tripodal_distance,
    verify_bilipschitz, AmbientMetric, DiscreteMetricTriangle,
};

fn point() -> impl Strategy<Value = Point2<f64>> {
    (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Point2::new(x, y))
}

fn corners() -> impl Strategy<Value = [[f64; 3]; 3]> {
    prop::array::uniform3((0.0..1.0f64, 0.0..1.0f64).prop_map(|(x, y)| [x, y, 0.0]))
        .prop_filter("nondegenerate", |c| {
            let cross = (c[1][0] - c[0][0]) * (c[2][1] - c[0][1]) - (c[1][1] - c[0][1]) * (c[2][0] - c[0][0]);
            let sides = [(0, 1), (1, 2), (2, 0)].map(|(i, j)| (c[i][0] - c[j][0]).hypot(c[i][1] - c[j][1]));
            cross.abs() > 0.05 && sides.iter().all(|&s| s > 0.1)
        })
}

proptest! {
    #[test]
    fn tripodal_metric_is_symmetric_and_comparable(x in point(), y in point()) {
        let d = tripodal_distance(x, y);
        prop_assert!((d - tripodal_distance(y, x)).abs() <= 1e-12);
        prop_assert!(x.dist(y) <= d + 1e-9);
        prop_assert!(d <= 2.0 * x.dist(y) + 1e-9);
    }

    #[test]
    fn tripodal_triangle_inequality(x in point(), y in point(), z in point()) {
        let (xy, yz, xz) = (tripodal_distance(x, y), tripodal_distance(y, z), tripodal_distance(x, z));
        prop_assert!(xz <= xy + yz + 1e-9);
    }

    #[test]
    fn sector_coordinates_reconstruct(x in point()) {
        let back = reconstruct(&sector_decompose(x));
        prop_assert!(back.dist(x) <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn embedding_window_on_planar_triangles(c in corners(), lp in 0usize..3) {
        let metric = [AmbientMetric::Euclidean, AmbientMetric::Linf, AmbientMetric::Norm { p: 1.0, map: [[1.0, 0.0], [0.0, 1.0]] }];
        let tri = ambient_triangle(&metric[lp], c, 12).unwrap();
        let image = embed_triangle(&tri).unwrap();
        let r = verify_bilipschitz(&tri, &image).unwrap();
        prop_assert!(r.pass, "{:?}", (r.min_ratio, r.max_ratio));
    }

    #[test]
    fn triangle_json_round_trip(c in corners()) {
        let tri = ambient_triangle(&AmbientMetric::Euclidean, c, 4).unwrap();
        let text = serde_json::to_string(&tri).unwrap();
        let back: DiscreteMetricTriangle<f64> = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, tri);
    }

    #[test]
    fn rectangle_decomposition_conserves_area(w in 0.2..3.0f64, h in 0.2..3.0f64, eps in 0.1..1.0f64) {
        let poly = PlanarPolygon::rectangle(0.0, 0.0, w, h);
        let d = grid_decompose(&poly, eps).unwrap();
        prop_assert!((d.total_area() - w * h).abs() <= 1e-9 * w * h);
        prop_assert!(d.max_perimeter() < eps);
        prop_assert!(d.perimeter_square_sum() <= 17.0 * w * h);
        let text = serde_json::to_string(&d).unwrap();
        prop_assert_eq!(serde_json::from_str::<metrifill::Decomposition>(&text).unwrap(), d);
    }

    #[test]
    fn graph_distances_are_a_metric(lens in prop::collection::vec(0.1..5.0f64, 6..12), extra in prop::collection::vec((0usize..12, 0usize..12, 0.1..5.0f64), 0..8)) {
        let mut g = MetricGraph::with_nodes(lens.len() + 1);
        for (i, &l) in lens.iter().enumerate() {
            g.add_edge(i, i + 1, l).unwrap();
        }
        let n = g.node_count();
        for (a, b, l) in extra {
            if a % n != b % n {
                g.add_edge(a % n, b % n, l).unwrap();
            }
        }
        let d: Vec<Vec<f64>> = (0..n).map(|s| g.distances_from(s)).collect();
        for i in 0..n {
            prop_assert_eq!(d[i][i], 0.0);
            for j in 0..n {
                prop_assert!((d[i][j] - d[j][i]).abs() <= 1e-12);
                for k in 0..n {
                    prop_assert!(d[i][k] <= d[i][j] + d[j][k] + 1e-12);
                }
            }
        }
    }

    #[test]
    fn path_modulus_is_reciprocal_length(lens in prop::collection::vec(0.1..4.0f64, 1..6)) {
        let total: f64 = lens.iter().sum();
        let (g, a, b) = path_graph(&lens);
        let r = discrete_modulus(&ModulusProblem::connect(g, vec![a], vec![b], 1e-9)).unwrap();
        prop_assert!((r.value - 1.0 / total).abs() <= 1e-9 / total);
        prop_assert!(r.lower <= r.value + 1e-12 && r.value <= r.upper + 1e-12);
    }
}

#[test]
fn point_serializes_as_pair() {
    let p = Point2::new(0.1f64, -2.5);
    assert_eq!(serde_json::to_string(&p).unwrap(), "[0.1,-2.5]");
}
