//! One-shot JSON protocol for out-of-process extractors.
//!
//! Request on stdin: `{"entity": {...}, "repo_root": "<path>"}`.
//! Response on stdout: the modified entity as a single JSON object.
//! Diagnostics go to stderr; exit status 0 means success.

use std::io::{Read, Write};
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use wait_timeout::ChildExt;

use super::ExternalCommand;
use crate::error::{Error, Result};
use crate::model::{ModelEntity, UUIDS_KEY};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExternalRequest {
    pub entity: ModelEntity,
    pub repo_root: String,
}

pub fn invoke_external(id: &str, cmd: &ExternalCommand, entity: ModelEntity, repo_root: &Path) -> Result<ModelEntity> {
    let original_uuids = entity.get(UUIDS_KEY).cloned();
    let request = ExternalRequest {
        entity,
        repo_root: repo_root.to_string_lossy().into_owned(),
    };
    let mut payload = serde_json::to_vec(&request).expect("request serializes");
    payload.push(b'\n');

    let mut child = Command::new(&cmd.argv[0])
        .args(&cmd.argv[1..])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| Error::Extractor {
            id: id.to_string(),
            message: format!("failed to start {:?}: {e}", cmd.argv[0]),
            exit_code: None,
            stderr: String::new(),
        })?;

    let mut stdin = child.stdin.take().expect("stdin piped");
    let writer = thread::spawn(move || {
        // A child that exits without reading its input closes the pipe early.
        match stdin.write_all(&payload) {
            Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e),
            _ => Ok(()),
        }
    });
    let stdout = drain(child.stdout.take().expect("stdout piped"));
    let stderr = drain(child.stderr.take().expect("stderr piped"));

    let status = match child.wait_timeout(cmd.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            // Grandchildren may still hold the pipes; the drain threads are
            // left to finish on their own.
            return Err(Error::Timeout {
                id: id.to_string(),
                seconds: cmd.timeout.as_secs_f64(),
            });
        }
        Err(e) => {
            let _ = child.kill();
            return Err(Error::Extractor {
                id: id.to_string(),
                message: format!("failed waiting for process: {e}"),
                exit_code: None,
                stderr: String::new(),
            });
        }
    };

    let stdout = stdout.join().unwrap_or_default();
    let stderr = String::from_utf8_lossy(&stderr.join().unwrap_or_default()).into_owned();
    if let Ok(Err(e)) = writer.join() {
        log::warn!("extractor {id}: failed writing request: {e}");
    }

    if !status.success() {
        return Err(Error::Extractor {
            id: id.to_string(),
            message: stderr.trim().to_string(),
            exit_code: status.code(),
            stderr,
        });
    }
    if !stderr.trim().is_empty() {
        log::debug!("extractor {id} stderr: {}", stderr.trim());
    }

    let protocol = |message: String| Error::Protocol {
        id: id.to_string(),
        message,
    };
    let response: Value = serde_json::from_slice(&stdout)
        .map_err(|e| protocol(format!("stdout is not a single JSON document: {e}")))?;
    let entity = ModelEntity::try_from(response).map_err(|e| protocol(e.to_string()))?;
    if entity.get(UUIDS_KEY) != original_uuids.as_ref() {
        return Err(protocol(format!("{UUIDS_KEY} was altered")));
    }
    Ok(entity)
}

fn drain<R: Read + Send + 'static>(mut source: R) -> thread::JoinHandle<Vec<u8>> {
    thread::spawn(move || {
        let mut buf = Vec::new();
        let _ = source.read_to_end(&mut buf);
        buf
    })
}
