//! `ppac-server [ADDR]`, default `127.0.0.1:8080`.

#[tokio::main]
async fn main() {
    let addr = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "127.0.0.1:8080".into());
    let listener = match tokio::net::TcpListener::bind(&addr).await {
        Ok(l) => l,
        Err(e) => {
            eprintln!("error[E_IO]: cannot bind {addr}: {e}");
            std::process::exit(1);
        }
    };
    eprintln!("listening on {addr}");
    if let Err(e) = ppac_server::serve(listener).await {
        eprintln!("error[E_IO]: {e}");
        std::process::exit(1);
    }
}
