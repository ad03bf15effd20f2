// HTTP completion client against a local stub that fails once, then answers.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::TcpListener;
use std::time::Duration;

use icl_gap::client::{CompletionModel, CompletionParams, HttpCompletion};
use icl_gap::DatasetId;

fn serve(listener: TcpListener, replies: Vec<(u16, String)>) {
    for (status, body) in replies {
        let Ok((mut stream, _)) = listener.accept() else { return };
        let mut reader = BufReader::new(stream.try_clone().unwrap());
        let mut len = 0;
        let mut line = String::new();
        while reader.read_line(&mut line).is_ok_and(|n| n > 0) && line != "\r\n" {
            if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                len = v.trim().parse().unwrap_or(0);
            }
            line.clear();
        }
        let mut request = vec![0; len];
        let _ = reader.read_exact(&mut request);
        println!("server got: {}", String::from_utf8_lossy(&request));
        let _ = write!(
            stream,
            "HTTP/1.1 {status} X\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{body}",
            body.len()
        );
    }
}

pub fn run_example() -> icl_gap::Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0").map_err(|e| icl_gap::Error::Argument(e.to_string()))?;
    let url = format!("http://{}/v1/completions", listener.local_addr().unwrap());
    let replies = vec![
        (503, r#"{"error":"overloaded"}"#.to_string()),
        (200, r#"{"choices":[{"text":" JUMP JUMP\n\nCommand: walk"}]}"#.to_string()),
    ];
    let server = std::thread::spawn(move || serve(listener, replies));

    let client = HttpCompletion::new(url, Some("demo-token".into()), Duration::from_secs(5), 3, Duration::from_millis(50));
    let params = CompletionParams::for_dataset(DatasetId::Scan);
    let raw = client.complete("Command: jump twice\nActions: ", &params)?;
    println!("raw completion: {raw:?}");
    server.join().unwrap();
    Ok(())
}

#[allow(dead_code)]
fn main() -> icl_gap::Result<()> {
    run_example()
}
