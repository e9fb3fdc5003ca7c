//! Serialized compiled forms and the signature-keyed artifact cache.

use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::assembly::{assemble, AssemblyOptions, CoefficientFunction, DofMap, GlobalTensor, SimplicialMesh};
use crate::form::CanonicalForm;
use crate::opt::{optimize, verify_schedule, EvaluationSchedule, MapCertificate, OptimizeOptions};
use crate::par::ExecPolicy;
use crate::tensor::{compile_with, CompiledForm};
use crate::{Error, Result};

/// Version of the bundle layout; bumped on incompatible changes.
pub const FORMAT_VERSION: u32 = 1;

/// Environment variable overriding the cache directory.
pub const CACHE_DIR_ENV: &str = "FORMC_CACHE_DIR";

/// Random trials used to verify a schedule before it is stored.
pub const VERIFY_TRIALS: usize = 20;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArtifactBundle {
    pub format_version: u32,
    pub tool_version: String,
    pub signature: String,
    pub compiled: CompiledForm,
    pub schedule: Option<EvaluationSchedule>,
    pub certificate: Option<MapCertificate>,
}

impl ArtifactBundle {
    /// Compile `form`; with `optimize` also build and verify a schedule.
    pub fn compile(form: &CanonicalForm, optimize_schedule: bool, policy: ExecPolicy) -> Result<Self> {
        let compiled = compile_with(form, policy)?;
        let (schedule, certificate) = if optimize_schedule {
            let options = OptimizeOptions::detect(&compiled, policy)?;
            let schedule = optimize(&compiled, options)?;
            let report = verify_schedule(&schedule, &compiled, VERIFY_TRIALS)?;
            (Some(schedule), Some(report.certificate))
        } else {
            (None, None)
        };
        Ok(ArtifactBundle {
            format_version: FORMAT_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            signature: compiled.signature.clone(),
            compiled,
            schedule,
            certificate,
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Parse a bundle and check its signature against the embedded form.
    pub fn from_json(text: &str) -> Result<Self> {
        let mut b: ArtifactBundle = serde_json::from_str(text)?;
        if b.format_version != FORMAT_VERSION {
            return Err(Error::Format(format!(
                "bundle format {} (expected {FORMAT_VERSION})",
                b.format_version
            )));
        }
        let computed = b.compiled.form.signature();
        for stored in [&b.signature, &b.compiled.signature] {
            if *stored != computed {
                return Err(Error::SignatureMismatch {
                    stored: stored.clone(),
                    computed,
                });
            }
        }
        for t in &mut b.compiled.terms {
            t.reference.snap();
        }
        Ok(b)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        write_atomic(path.as_ref(), self.to_json()?.as_bytes())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn assemble(
        &self,
        mesh: &SimplicialMesh,
        dofmaps: &[&DofMap],
        coefficients: &[&CoefficientFunction],
        options: &AssemblyOptions,
    ) -> Result<GlobalTensor> {
        assemble(&self.compiled, self.schedule.as_ref(), mesh, dofmaps, coefficients, options)
    }
}

/// Write through a temporary file in the same directory and rename it into
/// place, so readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let nanos = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_nanos());
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("artifact");
    let tmp = dir.join(format!(".{name}.{}.{nanos}.tmp", std::process::id()));
    std::fs::write(&tmp, bytes)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CacheStatus {
    Hit,
    Miss,
    /// An entry existed but could not be loaded and was rebuilt.
    Recomputed,
    Disabled,
}

/// Directory of bundles named by signature.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArtifactCache {
    pub dir: PathBuf,
}

impl ArtifactCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        ArtifactCache { dir: dir.into() }
    }

    /// `$FORMC_CACHE_DIR`, else `$XDG_CACHE_HOME/formc`, else
    /// `$HOME/.cache/formc`, else a directory under the system temp dir.
    pub fn default_location() -> Self {
        let env = |k: &str| std::env::var_os(k).filter(|v| !v.is_empty()).map(PathBuf::from);
        let dir = env(CACHE_DIR_ENV)
            .or_else(|| env("XDG_CACHE_HOME").map(|p| p.join("formc")))
            .or_else(|| env("HOME").map(|p| p.join(".cache").join("formc")))
            .unwrap_or_else(|| std::env::temp_dir().join("formc-cache"));
        ArtifactCache::new(dir)
    }

    pub fn entry_path(&self, signature: &str, optimized: bool) -> PathBuf {
        let suffix = if optimized { "-opt" } else { "" };
        self.dir.join(format!("{signature}{suffix}.json"))
    }

    /// Cached bundle for `form`, compiling and storing it on a miss.
    pub fn get_or_compile(
        &self,
        form: &CanonicalForm,
        optimize_schedule: bool,
        policy: ExecPolicy,
    ) -> Result<(ArtifactBundle, CacheStatus)> {
        let path = self.entry_path(&form.signature(), optimize_schedule);
        let mut status = CacheStatus::Miss;
        if path.exists() {
            match ArtifactBundle::load(&path) {
                Ok(b) if b.signature == form.signature() && b.schedule.is_some() == optimize_schedule => {
                    return Ok((b, CacheStatus::Hit))
                }
                Ok(_) => {
                    log::warn!("cache entry {} does not match its name; recomputing", path.display());
                    status = CacheStatus::Recomputed;
                }
                Err(e) => {
                    log::warn!("corrupt cache entry {} ({e}); recomputing", path.display());
                    status = CacheStatus::Recomputed;
                }
            }
        }
        let bundle = ArtifactBundle::compile(form, optimize_schedule, policy)?;
        bundle.save(&path)?;
        Ok((bundle, status))
    }
}
