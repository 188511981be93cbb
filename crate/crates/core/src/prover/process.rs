use super::{ProverConfig, ProverError};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::os::unix::process::CommandExt;
use std::process::{Command, Stdio};
use std::time::Duration;
use wait_timeout::ChildExt;

pub(super) struct RunOutcome {
    pub output: String,
    pub timed_out: bool,
}

/// Hard ceiling on captured output per stream.
const READ_LIMIT: u64 = 16 * 1024 * 1024;

fn resolve_program(program: &str, home_env: &str) -> Option<PathBuf> {
    if program.contains('/') {
        let p = PathBuf::from(program);
        return p.is_file().then_some(p);
    }
    let home = std::env::var_os(home_env).map(PathBuf::from);
    let search = home
        .into_iter()
        .chain(std::env::var_os("PATH").map(|p| std::env::split_paths(&p).collect::<Vec<_>>()).unwrap_or_default());
    search.map(|dir| dir.join(program)).find(|p| p.is_file())
}

fn substitute(template: &str, file: &Path, theory: &str, dir: &Path) -> Vec<String> {
    template
        .split_whitespace()
        .map(|part| {
            part.replace("{file}", &file.to_string_lossy())
                .replace("{theory}", theory)
                .replace("{dir}", &dir.to_string_lossy())
        })
        .collect()
}

/// Write `text` to `<theory>.pvs` in a fresh temp workspace and run the
/// command there. The workspace is removed unless the run failed.
pub(super) fn run_command(
    template: &str,
    theory: &str,
    text: &str,
    config: &ProverConfig,
    timeout: Duration,
) -> Result<RunOutcome, ProverError> {
    let io = |e: std::io::Error| ProverError::Io(e.to_string());
    let mut workspace = tempfile::Builder::new().prefix("mathpvs-").tempdir().map_err(io)?;
    let file = workspace.path().join(format!("{theory}.pvs"));
    std::fs::write(&file, text).map_err(io)?;
    let argv = substitute(template, &file, theory, workspace.path());
    let (program, args) = argv
        .split_first()
        .ok_or_else(|| ProverError::BackendUnavailable("empty command template".into()))?;
    let exe = resolve_program(program, &config.pvs_home_env)
        .ok_or_else(|| ProverError::BackendUnavailable(format!("`{program}` not found")))?;

    let mut child = Command::new(&exe)
        .args(args)
        .current_dir(workspace.path())
        .stdin(Stdio::null())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .process_group(0)
        .spawn()
        .map_err(|e| ProverError::BackendUnavailable(format!("{}: {e}", exe.display())))?;
    let drain = |r: Option<Box<dyn Read + Send>>| {
        std::thread::spawn(move || {
            let mut buf = Vec::new();
            if let Some(r) = r {
                let _ = r.take(READ_LIMIT).read_to_end(&mut buf);
            }
            buf
        })
    };
    let out = drain(child.stdout.take().map(|s| Box::new(s) as Box<dyn Read + Send>));
    let err = drain(child.stderr.take().map(|s| Box::new(s) as Box<dyn Read + Send>));

    let status = child.wait_timeout(timeout).map_err(io)?;
    let timed_out = status.is_none();
    if timed_out {
        // The whole group, so grandchildren release the output pipes.
        unsafe { libc::killpg(child.id() as libc::pid_t, libc::SIGKILL) };
        let _ = child.kill();
        let _ = child.wait();
    }
    let mut bytes = out.join().unwrap_or_default();
    bytes.extend(err.join().unwrap_or_default());
    let output = String::from_utf8_lossy(&bytes).into_owned();

    if let Some(log) = &config.full_log {
        if let Err(e) = std::fs::write(log, &output) {
            log::warn!("could not write prover log {}: {e}", log.display());
        }
    }
    let ok = status.is_some_and(|s| s.success());
    if !ok {
        workspace.disable_cleanup(true);
        log::warn!("prover run failed; workspace kept at {}", workspace.path().display());
    }
    Ok(RunOutcome { output, timed_out })
}
