use std::collections::BTreeMap;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use mtx_core::io::{
    generate_synthetic, load_dataset, store_field, store_labels, store_mesh_obj, store_tree_json,
    SyntheticKind, SyntheticSpec,
};
use mtx_core::segmentation::{run_query, QueryMethod, QuerySpec};
use mtx_core::{
    build_merge_tree, compute_distance_field, compute_persistence, extract_level_set, simplify,
    Connectivity, DerivedQuantitySpec, MetricKind, MultiFieldDataset, ScalarField,
    SimplificationMetric, TraitConfig,
};
use mtx_server::AppState;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] mtx_core::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

type Result<T, E = CliError> = std::result::Result<T, E>;

fn require_file(path: &Path) -> Result<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(CliError::Usage(format!("no such file: {}", path.display())))
    }
}

fn read_text(path: &Path) -> Result<String> {
    require_file(path)?;
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        context: path.display().to_string(),
        source,
    })
}

#[derive(Deserialize)]
#[serde(untagged)]
enum DerivedDoc {
    One(DerivedQuantitySpec),
    Many(Vec<DerivedQuantitySpec>),
}

/// Parses a derived spec file holding one spec object or an array of them.
pub fn parse_derived(text: &str) -> Result<Vec<DerivedQuantitySpec>> {
    let doc: DerivedDoc = serde_json::from_str(text)
        .map_err(|e| CliError::Usage(format!("derived spec: {e}")))?;
    Ok(match doc {
        DerivedDoc::One(s) => vec![s],
        DerivedDoc::Many(v) => v,
    })
}

fn open_dataset(path: &Path, derived: Option<&Path>) -> Result<MultiFieldDataset> {
    require_file(path)?;
    let specs = derived.map(read_text).transpose()?.map(|t| parse_derived(&t)).transpose()?;
    let mut ds = load_dataset(path)?;
    for spec in specs.unwrap_or_default() {
        ds.add_derived(&spec)?;
    }
    Ok(ds)
}

/// The single field of `path`, or the one called `name`.
fn open_field(path: &Path, name: Option<&str>) -> Result<ScalarField> {
    let ds = open_dataset(path, None)?;
    let field = match name {
        Some(n) => ds.require(n)?,
        None => match ds.fields() {
            [f] => f,
            fields => {
                let names: Vec<&str> = fields.iter().map(|f| f.name.as_str()).collect();
                return Err(CliError::Usage(format!(
                    "{} holds {} fields ({}); pick one with --name",
                    path.display(),
                    names.len(),
                    names.join(", ")
                )));
            }
        },
    };
    Ok(field.clone())
}

fn metric(kind: MetricKind, threshold: f64) -> Result<SimplificationMetric> {
    SimplificationMetric::new(kind, threshold).map_err(|e| CliError::Usage(e.to_string()))
}

pub fn query(
    method: QueryMethod,
    kind: MetricKind,
    threshold: f64,
    cut: Option<f64>,
) -> Result<QuerySpec> {
    QuerySpec::new(method, metric(kind, threshold)?, cut).map_err(|e| CliError::Usage(e.to_string()))
}

/// Human-readable dataset summary.
pub fn describe(ds: &MultiFieldDataset) -> String {
    let g = ds.grid();
    let mut out = format!(
        "grid     {} x {} x {} ({} voxels)\nspacing  {} {} {}\norigin   {} {} {}\n",
        g.dims[0],
        g.dims[1],
        g.dims[2],
        g.voxel_count(),
        g.spacing[0],
        g.spacing[1],
        g.spacing[2],
        g.origin[0],
        g.origin[1],
        g.origin[2],
    );
    let width = ds.fields().iter().map(|f| f.name.len()).max().unwrap_or(0).max(5);
    out.push_str(&format!("{:<width$}  {:>14}  {:>14}  derived\n", "field", "min", "max"));
    for f in ds.fields() {
        let (lo, hi) = f.range();
        let derived = if ds.is_derived(&f.name) { "yes" } else { "no" };
        out.push_str(&format!("{:<width$}  {lo:>14.6e}  {hi:>14.6e}  {derived}\n", f.name));
    }
    for (k, v) in &ds.metadata {
        out.push_str(&format!("meta {k} = {v}\n"));
    }
    out
}

pub fn info(path: &Path, derived: Option<&Path>) -> Result<()> {
    let ds = open_dataset(path, derived)?;
    print!("{}", describe(&ds));
    Ok(())
}

pub fn distance(
    path: &Path,
    trait_file: &Path,
    derived: Option<&Path>,
    output: &Path,
) -> Result<()> {
    let config = TraitConfig::from_json(&read_text(trait_file)?)?;
    let ds = open_dataset(path, derived)?;
    let field = compute_distance_field(&ds, &config)?;
    let metadata = BTreeMap::from([("trait".to_string(), config.to_json())]);
    store_field(&field, metadata, output)?;
    eprintln!("distance: max {:.6e} -> {}", field.max(), output.display());
    Ok(())
}

pub fn tree(
    path: &Path,
    name: Option<&str>,
    kind: MetricKind,
    threshold: f64,
    output: &Path,
) -> Result<()> {
    let metric = metric(kind, threshold)?;
    let field = open_field(path, name)?;
    let full = build_merge_tree(&field, Connectivity::Face6)?;
    let tree = simplify(&full, metric);
    let bd = compute_persistence(&tree);
    store_tree_json(&tree, &bd, output)?;
    eprintln!(
        "tree: {} leaves of {} kept, {} branches -> {}",
        tree.leaf_count(),
        full.leaf_count(),
        bd.len(),
        output.display()
    );
    Ok(())
}

pub fn segment(path: &Path, name: Option<&str>, query: QuerySpec, output: &Path) -> Result<()> {
    let field = open_field(path, name)?;
    let tree = build_merge_tree(&field, Connectivity::Face6)?;
    let bd = compute_persistence(&tree);
    let labels = run_query(&tree, &bd, &query)?;
    store_labels(&labels, output)?;
    for w in &labels.warnings {
        eprintln!("warning: {w}");
    }
    eprintln!("segment: {} segments -> {}", labels.segment_count(), output.display());
    Ok(())
}

pub fn mesh(path: &Path, name: Option<&str>, level: f64, output: &Path) -> Result<()> {
    if !level.is_finite() || level < 0.0 {
        return Err(CliError::Usage(format!("level must be a non-negative number, got {level}")));
    }
    let field = open_field(path, name)?;
    let mesh = extract_level_set(&field, level)?;
    store_mesh_obj(&mesh, output)?;
    eprintln!(
        "mesh: {} vertices, {} triangles -> {}",
        mesh.vertices.len(),
        mesh.triangles.len(),
        output.display()
    );
    Ok(())
}

pub fn synth(kind: SyntheticKind, dims: [usize; 3], seed: u64, output: &Path) -> Result<()> {
    let ds = generate_synthetic(&SyntheticSpec::new(kind, dims, seed))
        .map_err(|e| CliError::Usage(e.to_string()))?;
    mtx_core::io::store_dataset(&ds, output)?;
    Ok(())
}

pub fn serve(
    path: &Path,
    derived: Option<&Path>,
    addr: SocketAddr,
    ui: Option<PathBuf>,
) -> Result<()> {
    if let Some(dir) = &ui {
        if !dir.is_dir() {
            return Err(CliError::Usage(format!("no such directory: {}", dir.display())));
        }
    }
    let ds = open_dataset(path, derived)?;
    let state = AppState::new(ds);
    let runtime = tokio::runtime::Runtime::new().map_err(|source| CliError::Io {
        context: "starting runtime".into(),
        source,
    })?;
    eprintln!("serving {} on http://{addr}", path.display());
    runtime
        .block_on(mtx_server::serve(state, addr, ui))
        .map_err(|source| CliError::Io {
            context: format!("serving on {addr}"),
            source,
        })
}
