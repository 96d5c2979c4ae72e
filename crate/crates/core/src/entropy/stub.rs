//! Local stand-in for the remote quantum number service, used by tests and
//! offline diagnostics. Speaks just enough HTTP/1.1 for the client:
//! `GET ...?length=N&type=uint8` answered with `{"data":[...],"success":true}`.

use std::io::{BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::Arc;
use std::thread::JoinHandle;
use std::time::Duration;

/// How the stub answers requests.
#[derive(Debug, Clone)]
pub enum StubBehavior {
    /// Bytes 0, 1, 2, ... continuing across requests (mod 256).
    SequentialBytes,
    /// Every byte the same value.
    ConstantByte(u8),
    /// Always respond with this HTTP status and an empty body.
    ErrorStatus(u16),
    /// Respond 200 with a body that is not valid JSON.
    MalformedJson,
    /// Respond with well-formed JSON carrying `success: false`.
    ReportFailure,
    /// Sleep before answering, to trip client timeouts.
    Delay(Duration),
}

pub struct StubQrngServer {
    addr: SocketAddr,
    requests: Arc<AtomicU64>,
    shutdown: Arc<AtomicBool>,
    handle: Option<JoinHandle<()>>,
}

impl StubQrngServer {
    /// Binds 127.0.0.1 on an ephemeral port and serves until dropped.
    pub fn spawn(behavior: StubBehavior) -> std::io::Result<StubQrngServer> {
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let addr = listener.local_addr()?;
        let requests = Arc::new(AtomicU64::new(0));
        let shutdown = Arc::new(AtomicBool::new(false));

        let req_counter = Arc::clone(&requests);
        let stop_flag = Arc::clone(&shutdown);
        let handle = std::thread::spawn(move || {
            let mut next_byte: u64 = 0;
            for stream in listener.incoming() {
                if stop_flag.load(Ordering::SeqCst) {
                    break;
                }
                let Ok(stream) = stream else { continue };
                req_counter.fetch_add(1, Ordering::SeqCst);
                let _ = serve_one(stream, &behavior, &mut next_byte);
            }
        });

        Ok(StubQrngServer { addr, requests, shutdown, handle: Some(handle) })
    }

    /// Endpoint URL to hand to a client config.
    pub fn url(&self) -> String {
        format!("http://{}/api/random", self.addr)
    }

    pub fn request_count(&self) -> u64 {
        self.requests.load(Ordering::SeqCst)
    }
}

impl Drop for StubQrngServer {
    fn drop(&mut self) {
        self.shutdown.store(true, Ordering::SeqCst);
        // Unblock the accept loop.
        let _ = TcpStream::connect(self.addr);
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn serve_one(stream: TcpStream, behavior: &StubBehavior, next_byte: &mut u64) -> std::io::Result<()> {
    stream.set_read_timeout(Some(Duration::from_secs(5)))?;
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut request_line = String::new();
    reader.read_line(&mut request_line)?;
    // Drain headers.
    loop {
        let mut line = String::new();
        if reader.read_line(&mut line)? == 0 || line == "\r\n" || line == "\n" {
            break;
        }
    }

    let length = parse_length(&request_line).unwrap_or(0);
    let mut stream = stream;
    match behavior {
        StubBehavior::ErrorStatus(code) => {
            respond(&mut stream, *code, "")?;
        }
        StubBehavior::MalformedJson => {
            respond(&mut stream, 200, "this is not json {")?;
        }
        StubBehavior::ReportFailure => {
            respond(&mut stream, 200, "{\"data\":[],\"success\":false}")?;
        }
        StubBehavior::Delay(pause) => {
            std::thread::sleep(*pause);
            let body = json_body((0..length).map(|_| 0u8));
            respond(&mut stream, 200, &body)?;
        }
        StubBehavior::ConstantByte(value) => {
            let body = json_body((0..length).map(|_| *value));
            respond(&mut stream, 200, &body)?;
        }
        StubBehavior::SequentialBytes => {
            let start = *next_byte;
            *next_byte += length as u64;
            let body = json_body((0..length as u64).map(|i| ((start + i) % 256) as u8));
            respond(&mut stream, 200, &body)?;
        }
    }
    Ok(())
}

fn parse_length(request_line: &str) -> Option<usize> {
    let path = request_line.split_whitespace().nth(1)?;
    let query = path.split('?').nth(1)?;
    query
        .split('&')
        .find_map(|kv| kv.strip_prefix("length="))
        .and_then(|v| v.parse().ok())
}

fn json_body(bytes: impl Iterator<Item = u8>) -> String {
    let data: Vec<String> = bytes.map(|b| b.to_string()).collect();
    format!("{{\"data\":[{}],\"success\":true}}", data.join(","))
}

fn respond(stream: &mut TcpStream, status: u16, body: &str) -> std::io::Result<()> {
    let reason = match status {
        200 => "OK",
        500 => "Internal Server Error",
        503 => "Service Unavailable",
        _ => "Error",
    };
    let response = format!(
        "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
        body.len()
    );
    stream.write_all(response.as_bytes())?;
    stream.flush()
}
