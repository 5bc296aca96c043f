//! Request logging that cannot identify anyone.
//!
//! Client addresses are replaced by a salted hash. The salt is random,
//! rotated at each UTC day boundary and held only in memory, so hashes are
//! stable within a day and unlinkable across days. Every record is encrypted
//! with ChaCha20-Poly1305 before it reaches disk, one base64 line per record,
//! in one file per day. Files older than the retention period are deleted
//! whole.

use std::collections::BTreeMap;
use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::net::IpAddr;
use std::path::{Path, PathBuf};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Mutex};
use std::thread::JoinHandle;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use chacha20poly1305::aead::{Aead, KeyInit};
use chacha20poly1305::{ChaCha20Poly1305, Key, Nonce};
use rand::rngs::OsRng;
use rand::RngCore;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use time::format_description::well_known::Rfc3339;
use time::macros::format_description;
use time::{Date, OffsetDateTime};

/// How often the writer purges when no records arrive.
const PURGE_INTERVAL: Duration = Duration::from_secs(3600);

pub trait Clock: Send + Sync {
    fn now(&self) -> OffsetDateTime;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> OffsetDateTime {
        OffsetDateTime::now_utc()
    }
}

/// A settable clock for tests and replays.
pub struct ManualClock(Mutex<OffsetDateTime>);

impl ManualClock {
    pub fn new(at: OffsetDateTime) -> Self {
        ManualClock(Mutex::new(at))
    }

    pub fn set(&self, at: OffsetDateTime) {
        *self.0.lock().expect("clock lock") = at;
    }

    pub fn advance(&self, by: time::Duration) {
        let mut t = self.0.lock().expect("clock lock");
        *t += by;
    }
}

impl Clock for ManualClock {
    fn now(&self) -> OffsetDateTime {
        *self.0.lock().expect("clock lock")
    }
}

#[derive(Debug, thiserror::Error)]
pub enum LogError {
    #[error("log key {path}: {source}")]
    KeyUnreadable { path: PathBuf, source: io::Error },
    #[error("log key {0}: expected 32 raw bytes or 64 hex digits")]
    KeyMalformed(PathBuf),
    #[error("log line is not valid base64 or is too short")]
    Encoding,
    #[error("log line failed authentication")]
    Decrypt,
    #[error("log record: {0}")]
    Record(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Symmetric key for log encryption.
#[derive(Clone)]
pub struct LogKey([u8; 32]);

impl std::fmt::Debug for LogKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("LogKey(..)")
    }
}

impl LogKey {
    pub fn from_bytes(bytes: [u8; 32]) -> Self {
        LogKey(bytes)
    }

    pub fn generate() -> Self {
        let mut k = [0u8; 32];
        OsRng.fill_bytes(&mut k);
        LogKey(k)
    }

    /// Reads a key file holding 32 raw bytes or 64 hex digits. There is no
    /// fallback: without a key the service does not start.
    pub fn load(path: &Path) -> Result<Self, LogError> {
        let bytes = fs::read(path).map_err(|source| LogError::KeyUnreadable {
            path: path.to_path_buf(),
            source,
        })?;
        if let Ok(k) = <[u8; 32]>::try_from(bytes.as_slice()) {
            return Ok(LogKey(k));
        }
        let text = std::str::from_utf8(&bytes).map(str::trim).unwrap_or_default();
        if text.len() == 64 && text.bytes().all(|b| b.is_ascii_hexdigit()) {
            let mut k = [0u8; 32];
            for (i, byte) in k.iter_mut().enumerate() {
                *byte = u8::from_str_radix(&text[2 * i..2 * i + 2], 16).map_err(|_| LogError::KeyMalformed(path.into()))?;
            }
            return Ok(LogKey(k));
        }
        Err(LogError::KeyMalformed(path.to_path_buf()))
    }

    pub fn to_hex(&self) -> String {
        self.0.iter().map(|b| format!("{b:02x}")).collect()
    }

    fn cipher(&self) -> ChaCha20Poly1305 {
        ChaCha20Poly1305::new(Key::from_slice(&self.0))
    }
}

/// One served request, as stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    /// UTC, whole seconds, RFC 3339.
    pub timestamp: String,
    pub anonymized_client: String,
    pub route: String,
    pub query: Option<String>,
    pub status: u16,
    pub elapsed_ms: f64,
}

/// Encrypts a record into one line: base64 of nonce followed by ciphertext.
pub fn encrypt_record(key: &LogKey, record: &LogRecord) -> String {
    let mut nonce = [0u8; 12];
    OsRng.fill_bytes(&mut nonce);
    let plain = serde_json::to_vec(record).expect("records serialize");
    let sealed = key.cipher().encrypt(Nonce::from_slice(&nonce), plain.as_slice()).expect("encryption cannot fail");
    let mut out = nonce.to_vec();
    out.extend(sealed);
    B64.encode(out)
}

pub fn decrypt_record(key: &LogKey, line: &str) -> Result<LogRecord, LogError> {
    let raw = B64.decode(line.trim()).map_err(|_| LogError::Encoding)?;
    if raw.len() < 12 {
        return Err(LogError::Encoding);
    }
    let (nonce, sealed) = raw.split_at(12);
    let plain = key.cipher().decrypt(Nonce::from_slice(nonce), sealed).map_err(|_| LogError::Decrypt)?;
    Ok(serde_json::from_slice(&plain)?)
}

/// Salted client hashing with a salt that changes every UTC day.
pub struct Anonymizer {
    salt: Mutex<Option<(Date, [u8; 32])>>,
}

impl Default for Anonymizer {
    fn default() -> Self {
        Anonymizer { salt: Mutex::new(None) }
    }
}

impl Anonymizer {
    pub fn anonymize(&self, client: IpAddr, day: Date) -> String {
        let salt = {
            let mut guard = self.salt.lock().expect("salt lock");
            match *guard {
                Some((d, s)) if d == day => s,
                _ => {
                    // the previous day's salt is dropped here for good
                    let mut s = [0u8; 32];
                    OsRng.fill_bytes(&mut s);
                    *guard = Some((day, s));
                    s
                }
            }
        };
        let mut h = Sha256::new();
        h.update(salt);
        match client {
            IpAddr::V4(a) => h.update(a.octets()),
            IpAddr::V6(a) => h.update(a.octets()),
        }
        h.finalize()[..16].iter().map(|b| format!("{b:02x}")).collect()
    }
}

fn day_file_name(day: Date) -> String {
    format!("{}.log", day.format(format_description!("[year]-[month]-[day]")).expect("date formats"))
}

fn parse_day_file(name: &str) -> Option<Date> {
    let stem = name.strip_suffix(".log")?;
    Date::parse(stem, format_description!("[year]-[month]-[day]")).ok()
}

/// Deletes day files that are `retention_days` or more days old relative to
/// `today`, so no kept record is older than the retention period. Returns the
/// number of files removed. Other files in `dir` are left alone.
pub fn purge_logs(dir: &Path, retention_days: u32, today: Date) -> io::Result<usize> {
    let mut removed = 0;
    let entries = match fs::read_dir(dir) {
        Ok(e) => e,
        Err(e) if e.kind() == io::ErrorKind::NotFound => return Ok(0),
        Err(e) => return Err(e),
    };
    for entry in entries {
        let entry = entry?;
        let Some(day) = entry.file_name().to_str().and_then(parse_day_file) else { continue };
        if (today - day).whole_days() >= i64::from(retention_days) {
            fs::remove_file(entry.path())?;
            removed += 1;
        }
    }
    Ok(removed)
}

enum Message {
    Line(Date, String),
    Flush(mpsc::SyncSender<()>),
}

struct Writer {
    dir: PathBuf,
    retention_days: u32,
    clock: Arc<dyn Clock>,
    open: Option<(Date, File)>,
    last_purge: Option<Date>,
}

impl Writer {
    fn purge_if_new_day(&mut self, today: Date) {
        if self.last_purge != Some(today) {
            self.last_purge = Some(today);
            if let Err(e) = purge_logs(&self.dir, self.retention_days, today) {
                eprintln!("log purge failed: {e}");
            }
        }
    }

    fn append(&mut self, day: Date, line: &str) -> io::Result<()> {
        self.purge_if_new_day(day);
        if self.open.as_ref().map(|(d, _)| *d) != Some(day) {
            let f = OpenOptions::new().create(true).append(true).open(self.dir.join(day_file_name(day)))?;
            self.open = Some((day, f));
        }
        let (_, f) = self.open.as_mut().expect("opened above");
        f.write_all(line.as_bytes())?;
        f.write_all(b"\n")
    }

    fn run(mut self, rx: mpsc::Receiver<Message>) {
        loop {
            match rx.recv_timeout(PURGE_INTERVAL) {
                Ok(Message::Line(day, line)) => {
                    if let Err(e) = self.append(day, &line) {
                        eprintln!("log write failed: {e}");
                    }
                }
                Ok(Message::Flush(ack)) => {
                    if let Some((_, f)) = self.open.as_mut() {
                        let _ = f.flush();
                    }
                    let _ = ack.send(());
                }
                Err(RecvTimeoutError::Timeout) => {
                    let today = self.clock.now().date();
                    self.purge_if_new_day(today);
                }
                Err(RecvTimeoutError::Disconnected) => break,
            }
        }
    }
}

/// Daily request counts per route, the only access statistics kept.
pub type RequestCounts = BTreeMap<String, BTreeMap<String, u64>>;

/// Append-only encrypted request log drained by a single writer thread.
pub struct RequestLog {
    key: LogKey,
    dir: PathBuf,
    retention_days: u32,
    clock: Arc<dyn Clock>,
    anonymizer: Anonymizer,
    counts: Mutex<BTreeMap<Date, BTreeMap<String, u64>>>,
    tx: Mutex<Option<Sender<Message>>>,
    writer: Mutex<Option<JoinHandle<()>>>,
}

impl RequestLog {
    /// Creates `dir`, purges expired files and starts the writer.
    pub fn open(dir: &Path, key: LogKey, retention_days: u32, clock: Arc<dyn Clock>) -> Result<Self, LogError> {
        fs::create_dir_all(dir)?;
        let today = clock.now().date();
        purge_logs(dir, retention_days, today)?;
        let (tx, rx) = mpsc::channel();
        let writer = Writer {
            dir: dir.to_path_buf(),
            retention_days,
            clock: Arc::clone(&clock),
            open: None,
            last_purge: Some(today),
        };
        let handle = std::thread::Builder::new().name("donut-log-writer".into()).spawn(move || writer.run(rx))?;
        Ok(RequestLog {
            key,
            dir: dir.to_path_buf(),
            retention_days,
            clock,
            anonymizer: Anonymizer::default(),
            counts: Mutex::new(BTreeMap::new()),
            tx: Mutex::new(Some(tx)),
            writer: Mutex::new(Some(handle)),
        })
    }

    /// Queues one record. Never blocks on disk and never fails the request.
    pub fn log_request(&self, client: IpAddr, route: &str, query: Option<&str>, status: u16, elapsed_ms: f64) {
        let now = self.clock.now();
        let day = now.date();
        let timestamp = now.replace_nanosecond(0).unwrap_or(now).format(&Rfc3339).unwrap_or_default();
        let record = LogRecord {
            timestamp,
            anonymized_client: self.anonymizer.anonymize(client, day),
            route: route.to_string(),
            query: query.map(str::to_string),
            status,
            elapsed_ms,
        };
        {
            let mut counts = self.counts.lock().expect("counts lock");
            *counts.entry(day).or_default().entry(route.to_string()).or_default() += 1;
            let horizon = day - time::Duration::days(i64::from(self.retention_days));
            counts.retain(|d, _| *d > horizon);
        }
        let line = encrypt_record(&self.key, &record);
        if let Some(tx) = self.tx.lock().expect("sender lock").as_ref() {
            let _ = tx.send(Message::Line(day, line));
        }
    }

    /// Waits until everything queued so far is on disk.
    pub fn flush(&self) {
        let (ack, done) = mpsc::sync_channel(1);
        let sent = self.tx.lock().expect("sender lock").as_ref().map(|tx| tx.send(Message::Flush(ack)).is_ok());
        if sent == Some(true) {
            let _ = done.recv();
        }
    }

    /// Removes expired day files now.
    pub fn purge(&self) -> io::Result<usize> {
        purge_logs(&self.dir, self.retention_days, self.clock.now().date())
    }

    pub fn request_counts(&self) -> RequestCounts {
        self.counts
            .lock()
            .expect("counts lock")
            .iter()
            .map(|(d, routes)| (d.to_string(), routes.clone()))
            .collect()
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }
}

impl Drop for RequestLog {
    fn drop(&mut self) {
        self.tx.lock().expect("sender lock").take();
        if let Some(h) = self.writer.lock().expect("writer lock").take() {
            let _ = h.join();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use time::macros::datetime;

    #[test]
    fn salt_rotates_daily() {
        let a = Anonymizer::default();
        let ip: IpAddr = "192.0.2.7".parse().unwrap();
        let d1 = time::macros::date!(2024 - 03 - 01);
        let d2 = time::macros::date!(2024 - 03 - 02);
        let x = a.anonymize(ip, d1);
        assert_eq!(x, a.anonymize(ip, d1));
        assert_ne!(x, a.anonymize("192.0.2.8".parse().unwrap(), d1));
        assert_ne!(x, a.anonymize(ip, d2));
        assert!(!x.contains("192"));
    }

    #[test]
    fn encryption_round_trip_and_tamper() {
        let key = LogKey::generate();
        let r = LogRecord {
            timestamp: "2024-03-01T10:00:00Z".into(),
            anonymized_client: "ab".into(),
            route: "/search".into(),
            query: Some("homology".into()),
            status: 200,
            elapsed_ms: 1.5,
        };
        let line = encrypt_record(&key, &r);
        assert!(!line.contains("homology"));
        assert_eq!(decrypt_record(&key, &line).unwrap(), r);
        assert!(matches!(decrypt_record(&LogKey::generate(), &line), Err(LogError::Decrypt)));
        assert!(matches!(decrypt_record(&key, "!!"), Err(LogError::Encoding)));
    }

    #[test]
    fn key_files() {
        let dir = tempfile::tempdir().unwrap();
        let missing = dir.path().join("none");
        assert!(matches!(LogKey::load(&missing), Err(LogError::KeyUnreadable { .. })));
        let hex = dir.path().join("hex");
        let k = LogKey::generate();
        fs::write(&hex, format!("{}\n", k.to_hex())).unwrap();
        assert_eq!(LogKey::load(&hex).unwrap().0, k.0);
        let raw = dir.path().join("raw");
        fs::write(&raw, k.0).unwrap();
        assert_eq!(LogKey::load(&raw).unwrap().0, k.0);
        let short = dir.path().join("short");
        fs::write(&short, "abc").unwrap();
        assert!(matches!(LogKey::load(&short), Err(LogError::KeyMalformed(_))));
    }

    #[test]
    fn purge_boundary() {
        let dir = tempfile::tempdir().unwrap();
        let today = datetime!(2024-03-10 12:00 UTC).date();
        for back in 0..5 {
            fs::write(dir.path().join(day_file_name(today - time::Duration::days(back))), "x").unwrap();
        }
        fs::write(dir.path().join("notes.txt"), "keep").unwrap();
        assert_eq!(purge_logs(dir.path(), 3, today).unwrap(), 2);
        let mut left: Vec<String> = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        left.sort();
        assert_eq!(left, ["2024-03-08.log", "2024-03-09.log", "2024-03-10.log", "notes.txt"]);
    }
}
