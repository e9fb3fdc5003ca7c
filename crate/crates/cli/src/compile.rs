use std::path::{Path, PathBuf};

use formc::artifact::{write_atomic, ArtifactBundle, ArtifactCache, CacheStatus};
use formc::form::{lower, parse_form_file};
use formc::tensor::latex;
use formc::ExecPolicy;

use crate::{CliError, CliResult, Emit};

pub struct CompileArgs {
    pub form_file: PathBuf,
    pub optimize: bool,
    pub no_cache: bool,
    pub cache_dir: Option<PathBuf>,
    pub emit: Vec<Emit>,
    pub out_dir: Option<PathBuf>,
    pub policy: ExecPolicy,
}

pub fn run(args: &CompileArgs) -> CliResult<()> {
    let text = std::fs::read_to_string(&args.form_file)
        .map_err(|e| CliError::User(format!("{}: {e}", args.form_file.display())))?;
    let parsed = parse_form_file(&text)?;
    if args.emit.contains(&Emit::ScheduleDump) && !args.optimize {
        return Err(CliError::User("--emit schedule-dump requires --optimize".into()));
    }
    let stem = args
        .form_file
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("form")
        .to_string();
    let out_dir = match &args.out_dir {
        Some(d) => d.clone(),
        None => args
            .form_file
            .parent()
            .filter(|p| !p.as_os_str().is_empty())
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    std::fs::create_dir_all(&out_dir)?;
    let cache = args
        .cache_dir
        .clone()
        .map_or_else(ArtifactCache::default_location, ArtifactCache::new);
    for (name, form) in [("a", &parsed.a), ("L", &parsed.l)] {
        let Some(form) = form else { continue };
        let canonical = lower(form)?;
        let (bundle, status) = if args.no_cache {
            (ArtifactBundle::compile(&canonical, args.optimize, args.policy)?, CacheStatus::Disabled)
        } else {
            cache.get_or_compile(&canonical, args.optimize, args.policy)?
        };
        let status = match status {
            CacheStatus::Hit => "cache hit",
            CacheStatus::Miss => "cache miss",
            CacheStatus::Recomputed => "cache entry recomputed",
            CacheStatus::Disabled => "cache disabled",
        };
        println!("{name}: signature {} ({status})", bundle.signature);
        if let Some(c) = &bundle.certificate {
            println!(
                "{name}: MAPs direct {}, reduced {}, schedule {} (tree {}), discounted {}",
                c.direct, c.reduced, c.schedule, c.tree_weight, c.discounted
            );
        }
        let base = out_dir.join(format!("{stem}_{name}"));
        for e in &args.emit {
            let (path, body) = match e {
                Emit::Bundle => (base.with_extension("json"), bundle.to_json()?),
                Emit::Latex => (base.with_extension("tex"), latex::render(&bundle.compiled)),
                Emit::ScheduleDump => {
                    let s = bundle.schedule.as_ref().expect("optimized bundles carry a schedule");
                    (base.with_extension("schedule"), s.dump())
                }
            };
            write_atomic(&path, body.as_bytes())?;
            println!("{name}: wrote {}", path.display());
        }
    }
    if parsed.a.is_none() && parsed.l.is_none() {
        return Err(formc::Error::NoFormDefined.into());
    }
    Ok(())
}
