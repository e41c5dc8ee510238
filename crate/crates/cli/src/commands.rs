use std::io::{Read, Write};

use serde_json::{json, Map, Value};
use shapdag::graph::{
    enumerate_paths, extend_root_weights, kernel_total_weight_row, root_path_counts, total_path_weight_row,
};
use shapdag::projection::{
    drop_weak, null_elements, project_edge_weights, project_subset_with_cap, weak_elements, DEFAULT_EDGE_CAP,
};
use shapdag::shapley::{
    shapley_path_uniform, shapley_recursive, shapley_total_weights, shapley_weighted, Attribution, TotalWeightsEngine,
};
use shapdag::{
    Damg, ModuleValue, PathAlgebraElement, ProjectionKernel, Rational, RootWeights, Scalar, Shape, ValueFunction,
};

use crate::args::{Cli, Command, EngineFlag, Format, KernelFlag, Output};
use crate::demo;
use crate::document::{parse_document, GraphDocument, KernelSpec, Loaded};
use crate::error::CliError;

/// Significant digits used by `--float`.
pub const FLOAT_DIGITS: usize = 12;

/// Runs one command. `Ok(false)` means it ran but a check failed.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<bool, CliError> {
    match &cli.command {
        Command::Moebius { input, invert, output } => moebius(&load(&input.file)?, *invert, output, out),
        Command::Shapley { input, engine, kernel, table, output } => {
            let report = shapley(&load(&input.file)?, *engine, *kernel, *table)?;
            let text = match output.format {
                Format::Json => pretty(&report.to_json(output.float)),
                Format::Tsv => report.to_tsv(output.float),
            };
            emit(out, &text)?;
            Ok(report.checksums_match())
        }
        Command::Project { input, remove, onto, kernel, cap } => {
            let doc = project(&load(&input.file)?, remove.as_deref(), onto.as_deref(), *kernel, *cap)?;
            emit(out, &doc.to_json())?;
            Ok(true)
        }
        Command::Paths { input, from, to, cap, output } => {
            paths(&load(&input.file)?, from.as_deref().zip(to.as_deref()), *cap, output, out)
        }
        Command::Check { input, kernel } => check(&load(&input.file)?, *kernel, out),
        Command::Demo { name, format } => demo::run(*name, *format, out),
    }
}

pub fn read_input(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| CliError::io(path, e))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))
    }
}

fn load(path: &str) -> Result<Loaded, CliError> {
    parse_document(&read_input(path)?)?.load()
}

pub(crate) fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    match writeln!(out, "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(CliError::io("<output>", e)),
        _ => Ok(()),
    }
}

pub(crate) fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("values always serialize")
}

pub fn render(x: &Rational, float: bool) -> String {
    if float {
        x.to_decimal_string(FLOAT_DIGITS)
    } else {
        x.to_string()
    }
}

fn render_json(m: &ModuleValue<Rational>, float: bool) -> Value {
    match m {
        ModuleValue::Scalar(x) => Value::String(render(x, float)),
        ModuleValue::Vector(xs) => Value::Array(xs.iter().map(|x| Value::String(render(x, float))).collect()),
    }
}

fn render_cell(m: &ModuleValue<Rational>, float: bool) -> String {
    m.components().iter().map(|x| render(x, float)).collect::<Vec<_>>().join(",")
}

pub fn resolve_kernel(l: &Loaded, flag: Option<KernelFlag>) -> Result<ProjectionKernel<Rational>, CliError> {
    let spec = match flag {
        Some(KernelFlag::PathUniform) => KernelSpec::PathUniform,
        Some(KernelFlag::EdgeUniform) => KernelSpec::EdgeUniform,
        Some(KernelFlag::Induced) => KernelSpec::Induced,
        Some(KernelFlag::File) => l.kernel.clone().ok_or(CliError::Missing("kernel"))?,
        None => l.kernel.clone().unwrap_or(KernelSpec::PathUniform),
    };
    Ok(match spec {
        KernelSpec::PathUniform => ProjectionKernel::path_uniform(&l.graph),
        KernelSpec::EdgeUniform => ProjectionKernel::edge_uniform(&l.graph),
        KernelSpec::Induced => ProjectionKernel::induced(&l.sigma(), &l.tau())?,
        KernelSpec::Explicit(m) => {
            ProjectionKernel::from_map(&l.graph, m.0.iter().map(|(k, v)| (k.as_str(), v.0.clone())))?
        }
    })
}

// ---------------------------------------------------------------------------

fn moebius(l: &Loaded, invert: bool, output: &Output, out: &mut dyn Write) -> Result<bool, CliError> {
    let v = l.require_values()?;
    let result = if invert { v.inverse_moebius() } else { v.moebius_transform() };
    let text = match output.format {
        Format::Json if !output.float => GraphDocument::from_parts(
            &l.graph,
            l.edge_weights.as_ref(),
            l.root_weights.as_ref(),
            Some(&result),
            l.kernel.clone(),
        )
        .to_json(),
        Format::Json => {
            let map: Map<String, Value> =
                l.graph.labels().iter().zip(result.values()).map(|(k, m)| (k.clone(), render_json(m, true))).collect();
            pretty(&json!({ if invert { "values" } else { "synergy" }: map }))
        }
        Format::Tsv => {
            let mut lines = vec![format!("vertex\t{}", if invert { "value" } else { "synergy" })];
            for (k, m) in l.graph.labels().iter().zip(result.values()) {
                lines.push(format!("{k}\t{}", render_cell(m, output.float)));
            }
            lines.join("\n")
        }
    };
    emit(out, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

/// A root with its non-zero s(r|y), keyed by y.
pub type TableRow = (String, Vec<(String, Rational)>);

/// Shapley values with the efficiency checksum and optional s(r|y) table.
#[derive(Debug, Clone)]
pub struct AttributionReport {
    pub attribution: Attribution<Rational>,
    pub shapley_total: ModuleValue<Rational>,
    pub synergy_total: ModuleValue<Rational>,
    /// Per root, the non-zero s(r|y) in topological order of y.
    pub table: Option<Vec<TableRow>>,
}

impl AttributionReport {
    pub fn checksums_match(&self) -> bool {
        self.shapley_total == self.synergy_total
    }

    pub fn to_json(&self, float: bool) -> Value {
        let mut m = Map::new();
        m.insert("engine".into(), json!(self.attribution.engine.tag()));
        m.insert("kernel".into(), json!(self.attribution.kernel_provenance));
        let per_root: Map<String, Value> =
            self.attribution.per_root.iter().map(|(r, v)| (r.clone(), render_json(v, float))).collect();
        m.insert("shapley".into(), Value::Object(per_root));
        m.insert(
            "efficiency".into(),
            json!({
                "shapley_total": render_json(&self.shapley_total, float),
                "synergy_total": render_json(&self.synergy_total, float),
                "match": self.checksums_match(),
            }),
        );
        if let Some(table) = &self.table {
            let rows: Map<String, Value> = table
                .iter()
                .map(|(r, row)| {
                    let cells: Map<String, Value> =
                        row.iter().map(|(y, s)| (y.clone(), Value::String(render(s, float)))).collect();
                    (r.clone(), Value::Object(cells))
                })
                .collect();
            m.insert("table".into(), Value::Object(rows));
        }
        Value::Object(m)
    }

    pub fn to_tsv(&self, float: bool) -> String {
        let mut lines = vec![
            format!("# engine\t{}", self.attribution.engine.tag()),
            format!("# kernel\t{}", self.attribution.kernel_provenance),
            "root\tshapley".to_string(),
        ];
        for (r, v) in &self.attribution.per_root {
            lines.push(format!("{r}\t{}", render_cell(v, float)));
        }
        lines.push(format!(
            "# efficiency\t{}\t{}\t{}",
            render_cell(&self.shapley_total, float),
            render_cell(&self.synergy_total, float),
            if self.checksums_match() { "PASS" } else { "FAIL" }
        ));
        if let Some(table) = &self.table {
            lines.push("root\tvertex\ts".to_string());
            for (r, row) in table {
                for (y, s) in row {
                    lines.push(format!("{r}\t{y}\t{}", render(s, float)));
                }
            }
        }
        lines.join("\n")
    }
}

pub fn shapley(
    l: &Loaded,
    engine: EngineFlag,
    kernel: Option<KernelFlag>,
    table: bool,
) -> Result<AttributionReport, CliError> {
    let v = l.require_values()?;
    let conflict = |want: KernelFlag, engine: &str| match kernel {
        Some(k) if k != want => Err(CliError::Usage(format!("--kernel {k:?} conflicts with --engine {engine}"))),
        _ => Ok(()),
    };
    let (attribution, q) = match engine {
        EngineFlag::Recursive => {
            let q = resolve_kernel(l, kernel)?;
            (shapley_recursive(&q, v)?, q)
        }
        EngineFlag::TotalWeights => {
            let q = resolve_kernel(l, kernel)?;
            (TotalWeightsEngine::new(&q)?.attribute(v)?, q)
        }
        EngineFlag::PathUniform => {
            conflict(KernelFlag::PathUniform, "path-uniform")?;
            (shapley_path_uniform(v)?, ProjectionKernel::path_uniform(&l.graph))
        }
        EngineFlag::Weighted => {
            conflict(KernelFlag::Induced, "weighted")?;
            let (sigma, tau) = (l.sigma(), l.tau());
            (shapley_weighted(&sigma, &tau, v)?, ProjectionKernel::induced(&sigma, &tau)?)
        }
    };
    let g = &l.graph;
    let table = table.then(|| {
        let mut roots: Vec<usize> = g.roots().to_vec();
        roots.sort_by_key(|&r| g.label(r));
        roots
            .into_iter()
            .map(|r| {
                let row = kernel_total_weight_row(&q, r)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, s)| !s.is_zero())
                    .map(|(y, s)| (g.label(y).to_string(), s))
                    .collect();
                (g.label(r).to_string(), row)
            })
            .collect()
    });
    Ok(AttributionReport {
        shapley_total: attribution.total(),
        synergy_total: v.moebius_transform().total(),
        attribution,
        table,
    })
}

// ---------------------------------------------------------------------------

pub fn project(
    l: &Loaded,
    remove: Option<&[String]>,
    onto: Option<&[String]>,
    kernel: Option<KernelFlag>,
    cap: usize,
) -> Result<GraphDocument, CliError> {
    let g = &l.graph;
    let set: Vec<String> = match (remove, onto) {
        (Some(r), None) => r.iter().filter(|s| !s.is_empty()).cloned().collect(),
        (None, Some(o)) => {
            let keep: Vec<&String> = o.iter().filter(|s| !s.is_empty()).collect();
            g.indices_of(&keep)?;
            g.labels().iter().filter(|v| !keep.contains(v)).cloned().collect()
        }
        _ => return Err(CliError::Usage("give exactly one of --remove and --onto".into())),
    };
    let q = resolve_kernel(l, kernel)?;
    let w = match &l.values {
        Some(v) => v.moebius_transform(),
        None => ValueFunction::zero(g, Shape::Scalar),
    };
    let res = project_subset_with_cap(&q, &w, &set, cap)?;
    let h = &res.graph;
    let sigma = l.edge_weights.as_ref().map(|s| project_edge_weights(s, &set, cap)).transpose()?;
    let tau = match &l.root_weights {
        Some(_) => {
            let strength = extend_root_weights(&l.sigma(), &l.tau())?;
            let entries: Vec<(&str, Rational)> = h
                .roots()
                .iter()
                .map(|&r| g.index_of(h.label(r)).map(|v| (h.label(r), strength.get(v).clone())))
                .collect::<shapdag::Result<_>>()?;
            Some(RootWeights::from_map(h, entries)?)
        }
        None => None,
    };
    let values = l.values.as_ref().map(|_| &res.value);
    Ok(GraphDocument::from_parts(h, sigma.as_ref(), tau.as_ref(), values, Some(KernelSpec::explicit(&res.kernel))))
}

// ---------------------------------------------------------------------------

fn paths(
    l: &Loaded,
    between: Option<(&str, &str)>,
    cap: usize,
    output: &Output,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    let g = &l.graph;
    let f = output.float;
    let text = match between {
        None => {
            let pi = root_path_counts(g);
            let strength = match &l.edge_weights {
                Some(_) => Some(extend_root_weights(&l.sigma(), &l.tau())?),
                None => l.root_weights.as_ref().map(|t| extend_root_weights(&l.sigma(), t)).transpose()?,
            };
            match output.format {
                Format::Json => {
                    let counts: Map<String, Value> =
                        g.labels().iter().zip(&pi).map(|(k, p)| (k.clone(), json!(render(p, f)))).collect();
                    let mut m = Map::new();
                    m.insert("paths_from_roots".into(), Value::Object(counts));
                    if let Some(s) = &strength {
                        let vals: Map<String, Value> =
                            g.labels().iter().zip(s.values()).map(|(k, x)| (k.clone(), json!(render(x, f)))).collect();
                        m.insert("strength".into(), Value::Object(vals));
                    }
                    pretty(&Value::Object(m))
                }
                Format::Tsv => {
                    let mut lines =
                        vec![if strength.is_some() { "vertex\tpaths\tstrength" } else { "vertex\tpaths" }.to_string()];
                    for (y, k) in g.labels().iter().enumerate() {
                        let mut line = format!("{k}\t{}", render(&pi[y], f));
                        if let Some(s) = &strength {
                            line.push_str(&format!("\t{}", render(s.get(y), f)));
                        }
                        lines.push(line);
                    }
                    lines.join("\n")
                }
            }
        }
        Some((x, y)) => {
            let list = enumerate_paths(g, x, y, cap)?;
            let weight = match &l.edge_weights {
                Some(s) => Some(total_path_weight_row(s, g.index_of(x)?)[g.index_of(y)?].clone()),
                None => None,
            };
            match output.format {
                Format::Json => {
                    let mut m = Map::new();
                    m.insert("from".into(), json!(x));
                    m.insert("to".into(), json!(y));
                    m.insert("count".into(), json!(list.len()));
                    if let Some(w) = &weight {
                        m.insert("weight".into(), json!(render(w, f)));
                    }
                    m.insert("paths".into(), json!(list));
                    pretty(&Value::Object(m))
                }
                Format::Tsv => {
                    let mut lines = vec![format!("# count\t{}", list.len())];
                    if let Some(w) = &weight {
                        lines.push(format!("# weight\t{}", render(w, f)));
                    }
                    lines.extend(list.iter().map(|p| p.join("\t")));
                    lines.join("\n")
                }
            }
        }
    };
    emit(out, &text)?;
    Ok(true)
}

// ---------------------------------------------------------------------------

/// Largest graph for which `check` builds full path-algebra elements.
const CHECK_DENSE_LIMIT: usize = 300;
/// Number of single-vertex projections tried by `check`.
const CHECK_PROJECTIONS: usize = 50;

fn check(l: &Loaded, kernel: Option<KernelFlag>, out: &mut dyn Write) -> Result<bool, CliError> {
    let g = &l.graph;
    let v = l.require_values()?;
    let q = resolve_kernel(l, kernel)?;
    let w = v.moebius_transform();
    let mut results: Vec<(&str, Option<bool>)> = Vec::new();

    results
        .push(("moebius roundtrip", Some(w.inverse_moebius() == *v && v.inverse_moebius().moebius_transform() == *v)));
    results.push(("zeta * mu = mu * zeta = delta", convolution_identity(g)?));
    results.push(("kernel normalized", Some(q.is_normalized())));
    if !q.is_normalized() {
        return report_checks(&results, out);
    }

    let rec = shapley_recursive(&q, v)?;
    let mut engines_agree = rec.same_values(&shapley_total_weights(&q, v)?);
    match q.provenance() {
        "path-uniform" => engines_agree &= rec.same_values(&shapley_path_uniform(v)?),
        "induced" => engines_agree &= rec.same_values(&shapley_weighted(&l.sigma(), &l.tau(), v)?),
        _ => {}
    }
    results.push(("engines agree", Some(engines_agree)));
    results.push(("efficiency", Some(rec.total() == w.total())));

    let null = null_elements(v);
    let null_ok =
        g.roots().iter().filter(|r| null.contains(r)).all(|&r| rec.get(g.label(r)).is_some_and(ModuleValue::is_zero));
    results.push(("null roots receive zero", Some(null_ok)));

    let mut projection_ok = true;
    for z in (0..g.vertex_count()).filter(|&z| !g.is_root(z)).take(CHECK_PROJECTIONS) {
        let p = project_subset_with_cap(&q, &w, &[g.label(z)], DEFAULT_EDGE_CAP)?;
        projection_ok &= shapley_recursive(&p.kernel, &p.value)?.same_values(&rec);
    }
    results.push(("projection invariance", Some(projection_ok)));

    let weak: Vec<&str> = weak_elements(v).into_iter().filter(|&x| !g.is_root(x)).map(|x| g.label(x)).collect();
    let (_, q_weak, v_weak) = drop_weak(&q, v, &weak)?;
    results.push(("weak elements invariance", Some(shapley_recursive(&q_weak, &v_weak)?.same_values(&rec))));
    report_checks(&results, out)
}

fn convolution_identity(g: &Damg) -> Result<Option<bool>, CliError> {
    if g.vertex_count() > CHECK_DENSE_LIMIT {
        return Ok(None);
    }
    let zeta = PathAlgebraElement::<Rational>::zeta(g);
    let mu = PathAlgebraElement::<Rational>::moebius(g);
    let delta = PathAlgebraElement::delta(g);
    Ok(Some(zeta.convolve(&mu)? == delta && mu.convolve(&zeta)? == delta))
}

fn report_checks(results: &[(&str, Option<bool>)], out: &mut dyn Write) -> Result<bool, CliError> {
    let mut ok = true;
    let mut lines = Vec::new();
    for (name, r) in results {
        let status = match r {
            Some(true) => "PASS",
            Some(false) => {
                ok = false;
                "FAIL"
            }
            None => "SKIP",
        };
        lines.push(format!("{status}\t{name}"));
    }
    emit(out, &lines.join("\n"))?;
    Ok(ok)
}
