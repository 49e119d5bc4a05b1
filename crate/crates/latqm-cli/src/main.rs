mod commands;
mod config;
mod json;

use latqm_core::Error;

use crate::json::{obj, Json};

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let mut cfg = match config::parse_config(&args) {
        Ok(cfg) => cfg,
        Err(usage) => {
            report_error("usage", &usage.0, 2);
            return 2;
        }
    };
    match commands::dispatch(&mut cfg) {
        Ok(()) => 0,
        Err(err) => {
            let (kind, code) = classify(&err);
            report_error(kind, &err.to_string(), code);
            code
        }
    }
}

fn classify(err: &Error) -> (&'static str, i32) {
    match err {
        Error::InvalidArgument(_) | Error::LatticeMismatch(_) | Error::ResourceLimit(_) => {
            ("invalid-argument", 2)
        }
        Error::Instability(_) | Error::Quadrature(_) => ("numerical-instability", 3),
        Error::Io(_) => ("io", 4),
    }
}

fn report_error(kind: &str, message: &str, code: i32) {
    let payload = obj(vec![
        ("error", Json::Str(kind.to_string())),
        ("message", Json::Str(message.to_string())),
        ("exit_code", Json::Int(code as i64)),
    ]);
    eprint!("{}", payload.render());
}
