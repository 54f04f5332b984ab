use std::net::SocketAddr;

use aucpower_service::{app, Limits, ServiceConfig};
use clap::Parser;
use tracing::info;

#[derive(Parser, Debug)]
#[command(
    name = "aucpower-service",
    version,
    about = "HTTP API for the aucpower calculators"
)]
struct Args {
    #[arg(long, env = "AUCPOWER_BIND", default_value = "127.0.0.1")]
    bind: std::net::IpAddr,
    #[arg(long, env = "AUCPOWER_PORT", default_value_t = 8080)]
    port: u16,
    /// Worker threads for Monte Carlo runs (default: all cores).
    #[arg(long, env = "AUCPOWER_THREADS")]
    threads: Option<usize>,
    #[arg(long, env = "AUCPOWER_MAX_ITERATIONS", default_value_t = Limits::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, env = "AUCPOWER_MAX_GRID_POINTS", default_value_t = Limits::default().max_grid_points)]
    max_grid_points: usize,
    #[arg(long, env = "AUCPOWER_MAX_N", default_value_t = Limits::default().max_n)]
    max_n: usize,
    #[arg(long, env = "AUCPOWER_MAX_BODY_BYTES", default_value_t = Limits::default().max_body_bytes)]
    max_body_bytes: usize,
    /// Allowed CORS origin; repeat for several. Any origin when omitted.
    #[arg(
        long = "cors-origin",
        env = "AUCPOWER_CORS_ORIGINS",
        value_delimiter = ','
    )]
    cors_origins: Vec<String>,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .init();
    let args = Args::parse();
    if let Some(threads) = args.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(std::io::Error::other)?;
    }
    let cfg = ServiceConfig {
        limits: Limits {
            max_iterations: args.max_iterations,
            max_grid_points: args.max_grid_points,
            max_n: args.max_n,
            max_body_bytes: args.max_body_bytes,
            ..Limits::default()
        },
        cors_origins: args.cors_origins,
    };
    let addr = SocketAddr::new(args.bind, args.port);
    let listener = tokio::net::TcpListener::bind(addr).await?;
    info!(%addr, limits = ?cfg.limits, "listening");
    axum::serve(listener, app(cfg))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
