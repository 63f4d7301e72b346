//! On-disk skeleton cache: a header {g, n, tool_version} and one interchange
//! record per class. The directory comes from `TROPMOD_CACHE_DIR`; without it
//! nothing is cached.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use tropmod_core::{enumerate_all, Skeleton};

use crate::error::CliError;
use crate::format::GraphRecord;

pub const CACHE_ENV: &str = "TROPMOD_CACHE_DIR";
pub const TOOL_VERSION: &str = concat!("tropmod ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub g: usize,
    pub n: usize,
    pub tool_version: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkeletonRecord {
    pub p: isize,
    pub index: usize,
    pub facet: bool,
    pub graph: GraphRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SkeletonFile {
    pub header: CacheHeader,
    pub records: Vec<SkeletonRecord>,
}

impl SkeletonFile {
    pub fn from_skeleton(sk: &Skeleton, facets_only: bool) -> Self {
        let mut records = Vec::new();
        for k in 0..=sk.max_edges() {
            for i in 0..sk.count(k) {
                if facets_only && !sk.is_facet(k, i) {
                    continue;
                }
                let graph = sk.graph(k, i);
                records.push(SkeletonRecord {
                    p: k as isize - 1,
                    index: i,
                    facet: sk.is_facet(k, i),
                    graph: GraphRecord::from_graph(&graph).with_certificate(&graph),
                });
            }
        }
        SkeletonFile {
            header: CacheHeader {
                g: sk.g,
                n: sk.n,
                tool_version: TOOL_VERSION.to_string(),
            },
            records,
        }
    }

    /// Rebuilds the skeleton; the certificates are recomputed, not trusted.
    pub fn to_skeleton(&self) -> Result<Skeleton, CliError> {
        let (g, n) = (self.header.g, self.header.n);
        let top = tropmod_core::enumeration::max_edges(g, n)?;
        let mut certs: Vec<Vec<Box<[u8]>>> = vec![Vec::new(); top + 1];
        for r in &self.records {
            let graph = r.graph.to_graph()?;
            let k = graph.num_edges();
            if k > top || r.p != k as isize - 1 {
                return Err(CliError::Input("cache record has the wrong edge count".into()));
            }
            certs[k].push(tropmod_core::canon::certificate_of(&graph).into_boxed_slice());
        }
        for level in &mut certs {
            level.sort();
        }
        Ok(Skeleton::from_certificates(g, n, certs)?)
    }
}

pub fn cache_path(dir: &Path, g: usize, n: usize) -> PathBuf {
    dir.join(format!("skeleton-g{g}-n{n}.json"))
}

/// The skeleton for (g, n), read from the cache directory when a file with a
/// matching header exists, otherwise enumerated (and written back).
pub fn load_or_build(g: usize, n: usize) -> Result<Skeleton, CliError> {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) => load_or_build_in(Path::new(&dir), g, n),
        None => Ok(enumerate_all(g, n)?),
    }
}

pub fn load_or_build_in(dir: &Path, g: usize, n: usize) -> Result<Skeleton, CliError> {
    let path = cache_path(dir, g, n);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(file) = serde_json::from_str::<SkeletonFile>(&text) {
            let expected = CacheHeader {
                g,
                n,
                tool_version: TOOL_VERSION.to_string(),
            };
            if file.header == expected {
                if let Ok(sk) = file.to_skeleton() {
                    return Ok(sk);
                }
            }
        }
    }
    let sk = enumerate_all(g, n)?;
    fs::create_dir_all(dir)?;
    let body = serde_json::to_string(&SkeletonFile::from_skeleton(&sk, false)).expect("serializable");
    fs::write(&path, body)?;
    Ok(sk)
}
