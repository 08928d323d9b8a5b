//! Stage bookkeeping: declared inputs, atomic outputs with a `.meta.json`
//! sidecar, per-command run manifests and the working-directory lock.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::PipelineConfig;
use crate::error::{CliError, CliResult};

/// Names an output file; writing it aborts the process halfway through
/// the temp file, before the rename.
pub const FAULT_ENV: &str = "LEXDIV_FAULT_ABORT_WRITE";
pub const LOCK_FILE: &str = ".lexdiv.lock";
pub const MANIFEST_DIR: &str = "manifests";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileEntry {
    pub role: String,
    pub path: PathBuf,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub command: String,
    pub version: String,
    pub config_hash: String,
    pub seeds: serde_json::Value,
    pub inputs: Vec<FileEntry>,
    pub outputs: Vec<FileEntry>,
    pub wall_seconds: f64,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub details: serde_json::Value,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactMeta {
    pub command: String,
    pub config_hash: String,
    pub seed: Option<u64>,
    pub sha256: String,
}

pub fn meta_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".meta.json");
    PathBuf::from(s)
}

pub fn manifest_path(work_dir: &Path, command: &str) -> PathBuf {
    work_dir.join(MANIFEST_DIR).join(format!("{}.json", command.replace(' ', "-")))
}

pub fn sha256_file(path: &Path) -> io::Result<(String, u64)> {
    let mut f = File::open(path)?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    let mut n = 0u64;
    loop {
        let k = f.read(&mut buf)?;
        if k == 0 {
            break;
        }
        h.update(&buf[..k]);
        n += k as u64;
    }
    Ok((hex::encode(h.finalize()), n))
}

/// Temp file in the target directory, fsync, rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::Builder::new().prefix(".lexdiv-").suffix(".tmp").tempfile_in(dir)?;
    let fault = std::env::var_os(FAULT_ENV).is_some_and(|v| Some(v.as_os_str()) == path.file_name());
    if fault {
        tmp.write_all(&bytes[..bytes.len() / 2])?;
        tmp.as_file().sync_all()?;
        eprintln!("fault injection: aborting while writing {}", path.display());
        std::process::abort();
    }
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| CliError::Runtime(format!("{}: {}", path.display(), e.error)))?;
    Ok(())
}

/// Removes temp files left behind by an interrupted write.
pub fn sweep_temp_files(dir: &Path) -> io::Result<usize> {
    let mut n = 0;
    if !dir.is_dir() {
        return Ok(0);
    }
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let name = name.to_string_lossy();
        let ft = entry.file_type()?;
        if ft.is_dir() {
            n += sweep_temp_files(&entry.path())?;
        } else if name.starts_with(".lexdiv-") && name.ends_with(".tmp") {
            fs::remove_file(entry.path())?;
            n += 1;
        }
    }
    Ok(n)
}

/// One run of one command.
pub struct Stage {
    command: String,
    config_hash: String,
    work_dir: PathBuf,
    seed: Option<u64>,
    seeds: serde_json::Value,
    inputs: Vec<FileEntry>,
    outputs: Vec<FileEntry>,
    details: serde_json::Value,
    started: Instant,
}

impl Stage {
    pub fn begin(cfg: &PipelineConfig, command: &str, seed: Option<u64>) -> Stage {
        Stage {
            command: command.to_string(),
            config_hash: cfg.hash(),
            work_dir: cfg.paths.work_dir.clone(),
            seed,
            seeds: serde_json::to_value(&cfg.seeds).expect("seeds serialize"),
            inputs: Vec::new(),
            outputs: Vec::new(),
            details: serde_json::Value::Null,
            started: Instant::now(),
        }
    }

    pub fn command(&self) -> &str {
        &self.command
    }

    /// Records a required input; a missing file is a missing dependency.
    pub fn input(&mut self, role: &str, path: &Path) -> CliResult<PathBuf> {
        if !path.is_file() {
            return Err(CliError::missing(role, path));
        }
        let (sha256, bytes) = sha256_file(path)?;
        self.inputs.push(FileEntry { role: role.to_string(), path: path.to_path_buf(), sha256, bytes });
        Ok(path.to_path_buf())
    }

    pub fn optional_input(&mut self, role: &str, path: Option<&Path>) -> CliResult<Option<PathBuf>> {
        path.map(|p| self.input(role, p)).transpose()
    }

    /// Atomic write plus sidecar.
    pub fn write(&mut self, role: &str, path: &Path, bytes: &[u8]) -> CliResult<()> {
        write_atomic(path, bytes)?;
        self.record_output(role, path)
    }

    /// Registers a file written by other means and gives it a sidecar.
    pub fn record_output(&mut self, role: &str, path: &Path) -> CliResult<()> {
        let (sha256, bytes) = sha256_file(path)?;
        let meta = ArtifactMeta {
            command: self.command.clone(),
            config_hash: self.config_hash.clone(),
            seed: self.seed,
            sha256: sha256.clone(),
        };
        let mut text = serde_json::to_vec_pretty(&meta)?;
        text.push(b'\n');
        write_atomic(&meta_path(path), &text)?;
        self.outputs.push(FileEntry { role: role.to_string(), path: path.to_path_buf(), sha256, bytes });
        Ok(())
    }

    pub fn set_details(&mut self, details: serde_json::Value) {
        self.details = details;
    }

    pub fn finish(self) -> CliResult<Manifest> {
        let m = Manifest {
            command: self.command,
            version: VERSION.to_string(),
            config_hash: self.config_hash,
            seeds: self.seeds,
            inputs: self.inputs,
            outputs: self.outputs,
            wall_seconds: self.started.elapsed().as_secs_f64(),
            details: self.details,
        };
        let mut text = serde_json::to_vec_pretty(&m)?;
        text.push(b'\n');
        write_atomic(&manifest_path(&self.work_dir, &m.command), &text)?;
        Ok(m)
    }
}

pub fn read_manifest(work_dir: &Path, command: &str) -> CliResult<Manifest> {
    let p = manifest_path(work_dir, command);
    let text = fs::read_to_string(&p).map_err(|_| CliError::missing("manifest", &p))?;
    Ok(serde_json::from_str(&text)?)
}

/// Exclusive lock on a working directory, released on drop. A lock whose
/// owning process is gone is taken over.
#[derive(Debug)]
pub struct WorkLock {
    path: PathBuf,
}

fn pid_alive(pid: u32) -> bool {
    if cfg!(target_os = "linux") {
        Path::new(&format!("/proc/{pid}")).exists()
    } else {
        true
    }
}

impl WorkLock {
    pub fn acquire(work_dir: &Path) -> CliResult<WorkLock> {
        fs::create_dir_all(work_dir)?;
        let path = work_dir.join(LOCK_FILE);
        for _ in 0..2 {
            match OpenOptions::new().write(true).create_new(true).open(&path) {
                Ok(mut f) => {
                    writeln!(f, "{}", std::process::id())?;
                    f.sync_all()?;
                    return Ok(WorkLock { path });
                }
                Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                    let holder = fs::read_to_string(&path).unwrap_or_default();
                    match holder.trim().parse::<u32>() {
                        Ok(pid) if pid_alive(pid) => {
                            return Err(CliError::Runtime(format!(
                                "working directory {} is locked by process {pid} ({})",
                                work_dir.display(),
                                path.display()
                            )));
                        }
                        _ => {
                            let _ = fs::remove_file(&path);
                        }
                    }
                }
                Err(e) => return Err(e.into()),
            }
        }
        Err(CliError::Runtime(format!("could not acquire {}", path.display())))
    }
}

impl Drop for WorkLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
