use std::io::Write;
use std::path::Path;

use tempfile::NamedTempFile;

/// A named file produced by a command.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn new(name: &str, contents: String) -> Self {
        Self {
            name: name.to_string(),
            contents,
        }
    }

    pub fn json(name: &str, value: &serde_json::Value) -> Self {
        let mut text = serde_json::to_string_pretty(value).expect("JSON values serialize");
        text.push('\n');
        Self::new(name, text)
    }
}

/// Writes through a temporary file in `dir` and renames it into place.
pub fn write_atomic(dir: &Path, artifact: &Artifact) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(artifact.contents.as_bytes())?;
    tmp.flush()?;
    tmp.persist(dir.join(&artifact.name)).map_err(|e| e.error)?;
    Ok(())
}

/// Without an output directory a lone artifact goes to stdout as is;
/// several are each preceded by a `# name` line.
pub fn emit(out: Option<&Path>, artifacts: &[Artifact], stdout: &mut impl Write) -> std::io::Result<()> {
    match out {
        Some(dir) => {
            for a in artifacts {
                write_atomic(dir, a)?;
                writeln!(stdout, "{}", dir.join(&a.name).display())?;
            }
        }
        None if artifacts.len() == 1 => stdout.write_all(artifacts[0].contents.as_bytes())?,
        None => {
            for a in artifacts {
                writeln!(stdout, "# {}", a.name)?;
                stdout.write_all(a.contents.as_bytes())?;
            }
        }
    }
    Ok(())
}
