use proptest::prelude::*;
use rand::Rng;
use shapdag::generate::{positive_rational, random_damg, random_game, rng};
use shapdag::shapley::shapley_recursive;
use shapdag::{EdgeWeights, ProjectionKernel, RootWeights, Shape};
use shapdag_cli::document::{parse_document, GraphDocument, KernelSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_parse_load_is_identity(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let n = rng.random_range(1..=12);
        let g = random_damg(&mut rng, n, 0.4, 3);
        let shape = if rng.random_bool(0.5) { Shape::Scalar } else { Shape::Vector(3) };
        let v = random_game(&mut rng, &g, shape);
        let sigma = EdgeWeights::from_vec(&g, (0..g.edge_count()).map(|_| positive_rational(&mut rng)).collect()).unwrap();
        let tau = RootWeights::from_map(&g, g.roots().iter().map(|&r| (g.label(r), positive_rational(&mut rng)))).unwrap();
        let q = ProjectionKernel::induced(&sigma, &tau).unwrap();
        let with_weights = rng.random_bool(0.5);
        let doc = GraphDocument::from_parts(
            &g,
            with_weights.then_some(&sigma),
            with_weights.then_some(&tau),
            Some(&v),
            Some(KernelSpec::explicit(&q)),
        );
        let text = doc.to_json();
        let parsed = parse_document(&text).unwrap();
        prop_assert_eq!(&parsed, &doc);
        let loaded = parsed.load().unwrap();
        let again = GraphDocument::from_parts(
            &loaded.graph,
            loaded.edge_weights.as_ref(),
            loaded.root_weights.as_ref(),
            loaded.values.as_ref(),
            loaded.kernel.clone(),
        );
        prop_assert_eq!(again.to_json(), text);
        let q_loaded = match loaded.kernel.as_ref().unwrap() {
            KernelSpec::Explicit(m) => {
                ProjectionKernel::from_map(&loaded.graph, m.0.iter().map(|(k, x)| (k.as_str(), x.0.clone()))).unwrap()
            }
            other => panic!("unexpected kernel {other:?}"),
        };
        let before = shapley_recursive(&q, &v).unwrap();
        let after = shapley_recursive(&q_loaded, loaded.values.as_ref().unwrap()).unwrap();
        prop_assert!(before.same_values(&after));
    }
}
