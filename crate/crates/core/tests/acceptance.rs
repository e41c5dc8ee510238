//! Acceptance criteria. Runs as a plain binary and prints one PASS/FAIL line
//! per criterion; exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use rand::Rng;
use shapdag::builders::{coalition_damg, instances, ising_game, members, power_set_damg, CoalitionPartition};
use shapdag::generate::{chain_damg, layered_damg, random_flat_damg, random_game, rng, small_rational};
use shapdag::graph::{
    enumerate_paths, extend_root_weights, kernel_total_weights, path_counts, EdgeWeights, RootWeights,
};
use shapdag::projection::{drop_weak, project_edge_weights, project_subset, project_vertex};
use shapdag::shapley::{
    chain_shapley_comparator, classic_shapley_oracle, shapley_path_uniform, shapley_recursive, shapley_total_weights,
    shapley_weighted, Attribution, DEFAULT_CHAIN_CAP,
};
use shapdag::{
    moebius_function, rat, Damg, ModuleValue, PathAlgebraElement, ProjectionKernel, Rational, Scalar, Shape,
    ValueFunction,
};

use common::{random_graph, random_non_roots, weighted_instance, KernelKind};

type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)*) => {
        if !$cond {
            return Err(format!($($fmt)*));
        }
    };
}

fn ints(xs: &[i64]) -> Vec<Rational> {
    xs.iter().map(|&x| Rational::from(x)).collect()
}

fn scalars(v: &ValueFunction<Rational>) -> Vec<Rational> {
    v.values().iter().map(|m| m.as_scalar().unwrap().clone()).collect()
}

fn sh(a: &Attribution<Rational>, root: &str) -> Rational {
    a.scalar(root).unwrap_or_else(|| panic!("no attribution for {root}")).clone()
}

fn r<T: std::fmt::Debug>(res: shapdag::Result<T>) -> Result<T, String> {
    res.map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------

fn weak_middle() -> Check {
    let (g, v) = instances::weak_middle();
    let w = v.moebius_transform();
    ensure!(scalars(&w) == ints(&[1, 2, 3, 0, 0, 2, 8, 4]), "w = {:?}", scalars(&w));

    let q = ProjectionKernel::path_uniform(&g);
    let rec = r(shapley_recursive(&q, &v))?;
    let tot = r(shapley_total_weights(&q, &v))?;
    ensure!(sh(&rec, "b") == rat(9, 1), "Sh_b = {}", sh(&rec, "b"));

    // Independent check: s(r|y) = |Π(r, y)| / Σ_roots |Π(root, y)| by path enumeration.
    let roots = ["a", "b", "c"];
    let mut by_paths = [Rational::zero(), Rational::zero(), Rational::zero()];
    for y in g.labels() {
        let counts: Vec<i64> = roots
            .iter()
            .map(|x| enumerate_paths(&g, x, y, 1000).map(|p| p.len() as i64))
            .collect::<shapdag::Result<_>>()
            .map_err(|e| e.to_string())?;
        let total: i64 = counts.iter().sum();
        let wy = w.get_label(y).unwrap().as_scalar().unwrap().clone();
        for (i, c) in counts.iter().enumerate() {
            by_paths[i] = by_paths[i].clone() + rat(*c, total) * wy.clone();
        }
    }
    ensure!(by_paths == [rat(4, 1), rat(9, 1), rat(7, 1)], "path enumeration gives {by_paths:?}");
    for (root, want) in roots.iter().zip(&by_paths) {
        ensure!(sh(&tot, root) == *want, "total-weights Sh_{root} = {}", sh(&tot, root));
        ensure!(sh(&rec, root) == *want, "recursive Sh_{root} = {}", sh(&rec, root));
    }
    ensure!(rec.total() == ModuleValue::Scalar(rat(20, 1)), "efficiency sum {}", rec.total());
    ensure!(w.total() == ModuleValue::Scalar(rat(20, 1)), "synergy sum {}", w.total());
    Ok(())
}

fn reverse_tree() -> Check {
    let (g, v) = instances::reverse_tree();
    let q = ProjectionKernel::path_uniform(&g);
    let a = r(shapley_recursive(&q, &v))?;
    for root in ["a", "b", "c"] {
        ensure!(sh(&a, root) == rat(7, 3), "Sh_{root} = {}", sh(&a, root));
    }
    let chain = r(chain_shapley_comparator(&v, DEFAULT_CHAIN_CAP))?;
    let want = [rat(5, 3), rat(5, 3), rat(11, 3)];
    for (root, want) in ["a", "b", "c"].iter().zip(&want) {
        ensure!(sh(&chain, root) == *want, "chain Sh_{root} = {}", sh(&chain, root));
    }
    // Vertex d is the coalition ab and e is abc.
    let custom = r(ProjectionKernel::from_map(
        &g,
        [("de", rat(1, 3)), ("ce", rat(2, 3)), ("ad", rat(1, 2)), ("bd", rat(1, 2))],
    ))?;
    ensure!(custom.is_normalized(), "custom kernel not normalized");
    let tot = r(shapley_total_weights(&custom, &v))?;
    ensure!(tot.same_values(&chain), "custom kernel gives {:?}", tot.per_root);
    Ok(())
}

fn poset_game() -> Check {
    let (g, v) = instances::poset_game();
    ensure!(scalars(&v) == ints(&[2, 1, 4, 5]), "v = {:?}", scalars(&v));
    let w = v.moebius_transform();
    ensure!(scalars(&w) == ints(&[2, 1, 1, 2]), "w = {:?}", scalars(&w));
    let mu = moebius_function(&g);
    ensure!(g.edge_count() == 4, "expected four cover pairs");
    for e in g.edges() {
        ensure!(mu.get(e.tail, e.head) == rat(-1, 1), "μ({}) = {}", e.id, mu.get(e.tail, e.head));
    }
    let a = r(shapley_recursive(&ProjectionKernel::path_uniform(&g), &v))?;
    ensure!(sh(&a, "a") == rat(7, 2) && sh(&a, "b") == rat(5, 2), "Sh = {:?}", a.per_root);
    Ok(())
}

fn classic_recovery() -> Check {
    let mut rng = rng(4);
    let players = ["p1", "p2", "p3", "p4", "p5"];
    for i in 0..200 {
        let n = 2 + i % 4;
        let g = r(power_set_damg(&players[..n]))?;
        let v = random_game(&mut rng, &g, Shape::Scalar);
        // The oracle itself fails unless its synergy and permutation forms agree.
        let classic = r(classic_shapley_oracle(n, &v))?;
        let ours = r(shapley_path_uniform(&v))?;
        ensure!(ours.same_values(&classic), "game {i} (n = {n}): {:?} vs {:?}", ours.per_root, classic.per_root);
    }
    Ok(())
}

fn coalition_recovery() -> Check {
    let players: Vec<String> = ["a", "b", "c", "d", "e"].map(String::from).to_vec();
    let blocks = vec![vec!["a".to_string(), "b".to_string()], vec!["c".into()], vec!["d".into()], vec!["e".into()]];
    let g = r(coalition_damg(&CoalitionPartition { players, blocks }))?;
    let r1: BTreeSet<&str> = ["a", "b"].into();
    let sigma = EdgeWeights::constant(&g, Rational::one());
    let unit = RootWeights::constant(&g, Rational::one());
    let sized = r(RootWeights::from_map(
        &g,
        g.roots().iter().map(|&x| (g.label(x).to_string(), Rational::from(members(g.label(x)).len() as i64))),
    ))?;

    for y in g.labels() {
        let game = r(ValueFunction::unanimity(&g, y))?;
        let by_unit = r(shapley_weighted(&sigma, &unit, &game))?;
        let by_size = r(shapley_weighted(&sigma, &sized, &game))?;
        let ym = members(y);
        let size_y = ym.len() as i64;
        for &root in g.roots() {
            let rl = g.label(root);
            let rm = members(rl);
            let (want_unit, want_size) = if !rm.is_subset(&ym) {
                (Rational::zero(), Rational::zero())
            } else if r1.is_subset(&ym) {
                (rat(1, size_y - r1.len() as i64 + 1), rat(rm.len() as i64, size_y))
            } else {
                (rat(1, size_y), rat(rm.len() as i64, size_y))
            };
            ensure!(sh(&by_unit, rl) == want_unit, "τ≡1: coefficient({rl}, {y}) = {}", sh(&by_unit, rl));
            ensure!(sh(&by_size, rl) == want_size, "τ=|r|: coefficient({rl}, {y}) = {}", sh(&by_size, rl));
        }
    }
    Ok(())
}

fn ising_crossing() -> Check {
    let attribute = |x: Rational, beta: Rational| -> Result<Attribution<Rational>, String> {
        let (g, v) = r(ising_game(&instances::ising_four_spins(x, beta)))?;
        r(shapley_recursive(&ProjectionKernel::path_uniform(&g), &v))
    };
    let gap = |x: i64| -> Result<Rational, String> {
        let a = attribute(rat(x, 1), Rational::one())?;
        Ok(sh(&a, "a") - sh(&a, "d"))
    };
    // Sh_a − Sh_d is affine in J_bcd; solve for its root from two samples.
    let (g0, g1) = (gap(0)?, gap(1)?);
    let slope = g1 - g0.clone();
    ensure!(!slope.is_zero(), "gap does not depend on J_bcd");
    let crossing = (-g0).checked_div(&slope).unwrap();
    ensure!(crossing == rat(3, 1), "crossing at J_bcd = {crossing}");
    for x in 0..=6 {
        let d = gap(x)?;
        let ok = match x.cmp(&3) {
            std::cmp::Ordering::Less => d > Rational::zero(),
            std::cmp::Ordering::Equal => d.is_zero(),
            std::cmp::Ordering::Greater => d < Rational::zero(),
        };
        ensure!(ok, "Sh_a − Sh_d = {d} at J_bcd = {x}");
    }
    for x in [0, 3, 5] {
        let a = attribute(rat(x, 1), Rational::zero())?;
        ensure!(a.per_root.iter().all(|(_, v)| v.is_zero()), "β = 0 gives {:?}", a.per_root);
    }
    Ok(())
}

fn axiom_suite() -> Check {
    let mut rng = rng(7);
    for i in 0..1000 {
        let g = random_graph(&mut rng, 15);
        let inst = weighted_instance(&mut rng, g.clone(), KernelKind::pick(i));
        let q = &inst.kernel;
        let shape = if i % 2 == 0 { Shape::Scalar } else { Shape::Vector(3) };
        let v = random_game(&mut rng, &g, shape);
        let w = v.moebius_transform();
        let ctx = |what: &str| format!("instance {i} ({} vertices, {}): {what}", g.vertex_count(), q.provenance());

        ensure!(w.inverse_moebius() == v && v.inverse_moebius().moebius_transform() == v, "{}", ctx("roundtrip"));

        let zeta = PathAlgebraElement::<Rational>::zeta(&g);
        let mu = moebius_function(&g);
        let delta = PathAlgebraElement::delta(&g);
        ensure!(r(zeta.convolve(&mu))? == delta && r(mu.convolve(&zeta))? == delta, "{}", ctx("ζ⋆μ = μ⋆ζ = δ"));

        let rec = r(shapley_recursive(q, &v))?;
        let tot = r(shapley_total_weights(q, &v))?;
        ensure!(rec.same_values(&tot), "{}", ctx("recursive vs total-weights"));
        match q.provenance() {
            "path-uniform" => ensure!(rec.same_values(&r(shapley_path_uniform(&v))?), "{}", ctx("closed form")),
            "induced" => ensure!(
                rec.same_values(&r(shapley_weighted(&inst.sigma, &inst.tau, &v))?),
                "{}",
                ctx("weighted closed form")
            ),
            _ => {}
        }
        ensure!(rec.total() == w.total(), "{}", ctx("efficiency"));

        // Null root: clear the synergy below one root.
        let root = g.roots()[rng.random_range(0..g.roots().len())];
        let cleared: Vec<ModuleValue<Rational>> = (0..g.vertex_count())
            .map(|x| if g.descendants(root).contains(x) { ModuleValue::zero(shape) } else { w.get(x).clone() })
            .collect();
        let v_null = r(ValueFunction::from_values(&g, cleared))?.inverse_moebius();
        let a = r(shapley_recursive(q, &v_null))?;
        ensure!(a.get(g.label(root)).unwrap().is_zero(), "{}", ctx("null root"));

        // R-linearity.
        let v2 = random_game(&mut rng, &g, shape);
        let (c1, c2) = (small_rational(&mut rng), small_rational(&mut rng));
        let combo = r(v.scale(&c1).add(&v2.scale(&c2)))?;
        let lhs = r(shapley_recursive(q, &combo))?;
        let a2 = r(shapley_recursive(q, &v2))?;
        for ((l, x), ((_, y1), (_, y2))) in lhs.per_root.iter().zip(rec.per_root.iter().zip(&a2.per_root)) {
            ensure!(*x == y1.scaled(&c1).added(&y2.scaled(&c2)), "{}", ctx(&format!("R-linearity at {l}")));
        }

        // A-linearity: Sh(Σ uᵢ ⊗ aᵢ) = Σ Sh(uᵢ) ⊗ aᵢ.
        let u1 = random_game(&mut rng, &g, Shape::Scalar);
        let u2 = random_game(&mut rng, &g, Shape::Scalar);
        let av = |rng: &mut _| ModuleValue::Vector((0..3).map(|_| small_rational(rng)).collect());
        let (b1, b2) = (av(&mut rng), av(&mut rng));
        let tensored = r(r(u1.tensor(&b1))?.add(&r(u2.tensor(&b2))?))?;
        let lhs = r(shapley_recursive(q, &tensored))?;
        let (s1, s2) = (r(shapley_recursive(q, &u1))?, r(shapley_recursive(q, &u2))?);
        for ((l, x), ((_, y1), (_, y2))) in lhs.per_root.iter().zip(s1.per_root.iter().zip(&s2.per_root)) {
            let want = b1.scaled(y1.as_scalar().unwrap()).added(&b2.scaled(y2.as_scalar().unwrap()));
            ensure!(*x == want, "{}", ctx(&format!("A-linearity at {l}")));
        }

        // Projection invariance for S ⊆ V∖Rt.
        let set = random_non_roots(&mut rng, &g);
        let p = r(project_subset(q, &w, &set))?;
        ensure!(p.kernel.is_normalized(), "{}", ctx("projected kernel not normalized"));
        ensure!(r(shapley_recursive(&p.kernel, &p.value))?.same_values(&rec), "{}", ctx("projection invariance"));

        // Weak-elements invariance.
        let weak = random_non_roots(&mut rng, &g);
        let weak_idx = r(g.indices_of(&weak))?;
        let mut wv: Vec<ModuleValue<Rational>> = w.values().to_vec();
        for &x in &weak_idx {
            wv[x] = ModuleValue::zero(shape);
        }
        let v_weak = r(ValueFunction::from_values(&g, wv))?.inverse_moebius();
        let before = r(shapley_recursive(q, &v_weak))?;
        let (_, q_dropped, v_dropped) = r(drop_weak(q, &v_weak, &weak))?;
        ensure!(r(shapley_recursive(&q_dropped, &v_dropped))?.same_values(&before), "{}", ctx("weak elements"));

        // Flat hierarchies: Sh_r(ζ_y) = |E(r, y)| / |E(y)| for leaves y.
        let (nr, nl) = (rng.random_range(1..=4), rng.random_range(1..=5));
        let flat = random_flat_damg(&mut rng, nr, nl);
        let fq = weighted_instance(&mut rng, flat.clone(), KernelKind::pick(i)).kernel;
        let pu = ProjectionKernel::path_uniform(&flat);
        for y in 0..flat.vertex_count() {
            let game = r(ValueFunction::unanimity(&flat, flat.label(y)))?;
            let by_pu = r(shapley_recursive(&pu, &game))?;
            for &root in flat.roots() {
                let want = if flat.is_root(y) {
                    if root == y {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                } else {
                    rat(flat.multiplicity(root, y) as i64, flat.in_edges(y).len() as i64)
                };
                ensure!(sh(&by_pu, flat.label(root)) == want, "{}", ctx("flat hierarchy"));
            }
            // Any normalized kernel gives q(r|y) on a flat graph.
            let by_q = r(shapley_recursive(&fq, &game))?;
            for &root in flat.roots() {
                let want = if flat.is_root(y) {
                    if root == y {
                        Rational::one()
                    } else {
                        Rational::zero()
                    }
                } else {
                    fq.pairwise(root, y)
                };
                ensure!(sh(&by_q, flat.label(root)) == want, "{}", ctx("flat hierarchy, custom kernel"));
            }
        }
    }
    Ok(())
}

/// Index of `label` in `to`, given as index in `from`.
fn mapped(from: &Damg, to: &Damg, v: usize) -> usize {
    to.index_of(from.label(v)).unwrap()
}

fn projection_stability() -> Check {
    let mut rng = rng(8);
    for i in 0..500 {
        let g = random_graph(&mut rng, 14);
        let inst = weighted_instance(&mut rng, g.clone(), KernelKind::pick(i));
        let set = random_non_roots(&mut rng, &g);
        let removed: BTreeSet<usize> = r(g.indices_of(&set))?.into_iter().collect();
        let zero = ValueFunction::zero(&g, Shape::Scalar);
        let p = r(project_subset(&inst.kernel, &zero, &set))?;
        let h = &p.graph;
        let keep: Vec<usize> = (0..g.vertex_count()).filter(|v| !removed.contains(v)).collect();
        let ctx = |what: &str| format!("instance {i}, removing {set:?}: {what}");

        ensure!(h.vertex_count() == keep.len(), "{}", ctx("vertex count"));
        ensure!(h.roots().len() == g.roots().len(), "{}", ctx("roots"));

        let (pc_g, pc_h) = (path_counts(&g), path_counts(h));
        let (s_g, s_h) = (kernel_total_weights(&inst.kernel), kernel_total_weights(&p.kernel));
        for &y in &keep {
            let yh = mapped(&g, h, y);
            ensure!(pc_h.per_vertex[yh] == pc_g.per_vertex[y], "{}", ctx("π(y)"));
            let anc_g: BTreeSet<&str> =
                g.ancestors(y).ones().filter(|a| !removed.contains(a)).map(|a| g.label(a)).collect();
            let anc_h: BTreeSet<&str> = h.ancestors(yh).ones().map(|a| h.label(a)).collect();
            ensure!(anc_g == anc_h, "{}", ctx("ancestors"));
            for &x in &keep {
                let xh = mapped(&g, h, x);
                ensure!(pc_h.pairwise.get(xh, yh) == pc_g.pairwise.get(x, y), "{}", ctx("π(x, y)"));
                ensure!(s_h.get(xh, yh) == s_g.get(x, y), "{}", ctx("s(x|y)"));
            }
        }

        let sigma_h = r(project_edge_weights(&inst.sigma, &set, usize::MAX))?;
        ensure!(sigma_h.graph() == h, "{}", ctx("edge weights projected onto a different graph"));
        let tau_h = r(RootWeights::from_map(
            h,
            h.roots().iter().map(|&x| (h.label(x), inst.tau.get(mapped(h, &g, x)).clone())),
        ))?;
        let strength_g = r(extend_root_weights(&inst.sigma, &inst.tau))?;
        let strength_h = r(extend_root_weights(&sigma_h, &tau_h))?;
        for &y in &keep {
            ensure!(strength_h.get(mapped(&g, h, y)) == strength_g.get(y), "{}", ctx("strength"));
        }

        let pu = r(project_subset(&ProjectionKernel::path_uniform(&g), &zero, &set))?.kernel;
        ensure!(pu.per_edge() == ProjectionKernel::path_uniform(h).per_edge(), "{}", ctx("path-uniform commutation"));
        let induced = ProjectionKernel::induced(&inst.sigma, &inst.tau).unwrap();
        let induced_p = r(project_subset(&induced, &zero, &set))?.kernel;
        let induced_h = r(ProjectionKernel::induced(&sigma_h, &tau_h))?;
        ensure!(induced_p.per_edge() == induced_h.per_edge(), "{}", ctx("induced commutation"));

        // Order independence, field by field, with a live game.
        let w = random_game(&mut rng, &g, Shape::Scalar).moebius_transform();
        let whole = r(project_subset(&inst.kernel, &w, &set))?;
        let mut order = set.clone();
        for k in (1..order.len()).rev() {
            order.swap(k, rng.random_range(0..=k));
        }
        let (mut q_step, mut w_step) = (inst.kernel.clone(), w.clone());
        for z in &order {
            let step = r(project_vertex(&q_step, &w_step, z))?;
            q_step = step.kernel;
            w_step = step.synergy;
        }
        ensure!(whole.graph == *q_step.graph(), "{}", ctx(&format!("graph differs for order {order:?}")));
        ensure!(whole.kernel.per_edge() == q_step.per_edge(), "{}", ctx("kernel differs by order"));
        ensure!(whole.synergy == w_step, "{}", ctx("synergy differs by order"));
        ensure!(whole.value == w_step.inverse_moebius(), "{}", ctx("value differs by order"));
    }
    Ok(())
}

fn complexity_smoke() -> Check {
    let mut rng = rng(9);
    for (name, g) in [("chain", chain_damg(10_000)), ("layered", layered_damg(64, 5_000))] {
        let w_in = random_small_ints(&mut rng, &g);
        let v = w_in.inverse_moebius();
        let q = ProjectionKernel::path_uniform(&g);
        let start = Instant::now();
        let w = v.moebius_transform();
        let a = r(shapley_recursive(&q, &v))?;
        let elapsed = start.elapsed();
        ensure!(w == w_in, "{name}: roundtrip failed");
        ensure!(a.total() == w.total(), "{name}: efficiency failed");
        ensure!(elapsed < Duration::from_secs(10), "{name}: {:.2} s", elapsed.as_secs_f64());
        println!("    {name}: {} vertices, {} edges, {:.3} s", g.vertex_count(), g.edge_count(), elapsed.as_secs_f64());
    }
    Ok(())
}

fn random_small_ints<R: Rng>(rng: &mut R, g: &Damg) -> ValueFunction<Rational> {
    let values = (0..g.vertex_count()).map(|_| Rational::from(rng.random_range(-3..=3i64))).collect();
    ValueFunction::from_scalars(g, values).unwrap()
}

// ---------------------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "weak-middle regression", budget: Some(Duration::from_secs(1)), run: weak_middle },
        Criterion { id: 2, name: "reverse-tree regression", budget: None, run: reverse_tree },
        Criterion { id: 3, name: "poset-game regression", budget: None, run: poset_game },
        Criterion { id: 4, name: "classic recovery", budget: Some(Duration::from_secs(30)), run: classic_recovery },
        Criterion { id: 5, name: "coalition recovery", budget: None, run: coalition_recovery },
        Criterion { id: 6, name: "ising crossing", budget: None, run: ising_crossing },
        Criterion { id: 7, name: "axiom property suite", budget: Some(Duration::from_secs(120)), run: axiom_suite },
        Criterion { id: 8, name: "projection stability", budget: None, run: projection_stability },
        Criterion { id: 9, name: "complexity smoke", budget: None, run: complexity_smoke },
    ];
    let filter: Option<u32> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_none_or(|f| f == c.id)) {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(()), Some(b)) if elapsed > b => Err(format!("over budget of {} s", b.as_secs())),
            (o, _) => o,
        };
        match outcome {
            Ok(()) => println!("PASS  criterion {}: {} ({:.2} s)", c.id, c.name, elapsed.as_secs_f64()),
            Err(e) => {
                failed += 1;
                println!("FAIL  criterion {}: {} ({:.2} s): {e}", c.id, c.name, elapsed.as_secs_f64());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
