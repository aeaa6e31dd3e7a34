use std::fs;
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use inr_opt_core::gallery::{generate, GalleryMatrix, GallerySpec};

use crate::args::{GalleryArgs, GalleryFamily};
use crate::error::{CliError, CliResult};
use crate::mtx;
use crate::output::Report;

fn spec(args: &GalleryArgs) -> CliResult<GallerySpec> {
    let size = |default: usize| args.size.unwrap_or(default);
    Ok(match args.family {
        GalleryFamily::ChengHigham7 => {
            if args.size.is_some_and(|n| n != 7) {
                return Err(CliError::Usage("cheng-higham7 has a fixed size of 7".into()));
            }
            GallerySpec::ChengHigham7
        }
        GalleryFamily::Fiedler => GallerySpec::Fiedler { n: size(6) },
        GalleryFamily::Moler => GallerySpec::Moler { n: size(6) },
        GalleryFamily::Grcar => GallerySpec::Grcar { n: size(640) },
        GalleryFamily::TridiagNonsmooth => GallerySpec::TridiagNonsmooth { n: size(10) },
        GalleryFamily::QepMassSpring => GallerySpec::QepMassSpring {
            n: size(4),
            beta: args.beta,
        },
        GalleryFamily::QepLinearization => GallerySpec::QepLinearization {
            n: size(4),
            beta: args.beta,
        },
        GalleryFamily::Poisson2d => GallerySpec::Poisson2d { k: size(10) },
        GalleryFamily::SparseRandom => GallerySpec::SparseRandom {
            n: size(100),
            density: args.density,
            seed: args.seed,
        },
        GalleryFamily::SyntheticSaddle => {
            let n = size(100);
            GallerySpec::SyntheticSaddle {
                n,
                m: args.m.unwrap_or(n / 2).max(1),
                seed: args.seed,
            }
        }
    })
}

/// `out` itself for a single matrix, `<stem>_<label>.<ext>` next to it otherwise.
fn target(out: &Path, label: &str, single: bool) -> PathBuf {
    if single {
        return out.to_path_buf();
    }
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = out.extension().map(|e| e.to_string_lossy().into_owned()).unwrap_or_else(|| "mtx".into());
    out.with_file_name(format!("{stem}_{label}.{ext}"))
}

pub fn gallery(args: &GalleryArgs) -> CliResult<Report> {
    let matrices = generate(&spec(args)?)?;
    let single = matrices.len() == 1;
    let mut files = Vec::new();
    for (label, m) in &matrices {
        let (text, dim) = match m {
            GalleryMatrix::Hermitian(h) => match h.as_sparse() {
                Some(s) => (mtx::format_sparse(s), h.dim()),
                None => (mtx::format_dense(h.to_dense().as_ref()), h.dim()),
            },
            GalleryMatrix::General(d) => (mtx::format_dense(d.as_ref()), d.nrows()),
            GalleryMatrix::GeneralSparse(s) => (mtx::format_sparse(s), s.dim()),
        };
        let path = target(&args.output, label, single);
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        }
        fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        files.push(json!({ "label": label, "path": path.display().to_string(), "dim": dim }));
    }
    let mut f = Map::new();
    f.insert("files".into(), Value::Array(files));
    Ok(Report::new("gallery", f))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn labels_go_before_the_extension() {
        let out = Path::new("dir/pair.mtx");
        assert_eq!(target(out, "A", false), Path::new("dir/pair_A.mtx"));
        assert_eq!(target(out, "A", true), out);
        assert_eq!(target(Path::new("q"), "M", false), Path::new("q_M.mtx"));
    }
}
