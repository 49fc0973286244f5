//! Runs the HTTP service on a local port until ctrl-c.
//!
//!     cargo run --example serve -- 127.0.0.1:8080

use patternbench::service::http::{serve, Config};

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let address = std::env::args().nth(1).unwrap_or_else(|| "127.0.0.1:0".into());
    let listener = tokio::net::TcpListener::bind(&address).await?;
    println!("listening on http://{}", listener.local_addr()?);
    serve(listener, Config::default()).await
}
