use std::process::ExitCode;

use log::error;
use polarlink::app::{parse_args, run_image_mode, run_sweep_mode, threads_from_env, ArgsError, Mode};

fn main() -> ExitCode {
    let mut config = match parse_args(std::env::args_os()) {
        Ok(c) => c,
        Err(ArgsError::Clap(e)) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
        Err(ArgsError::Invalid(e)) => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            return ExitCode::from(2);
        }
    };

    let level = if config.verbose { "debug" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    config.threads = match threads_from_env() {
        Ok(t) => t,
        Err(e) => {
            error!("{e}");
            return ExitCode::from(2);
        }
    };

    match config.mode {
        Mode::Image => match run_image_mode(&config) {
            Ok(summary) if summary.success() => ExitCode::SUCCESS,
            Ok(summary) => {
                error!(
                    "{} of {} image/SNR pairs failed",
                    summary.failures.len(),
                    summary.failures.len() + summary.outputs.len()
                );
                ExitCode::FAILURE
            }
            Err(e) => {
                error!("{e}");
                ExitCode::from(2)
            }
        },
        Mode::Sweep => match run_sweep_mode(&config) {
            Ok(_) => ExitCode::SUCCESS,
            Err(e) => {
                error!("{e}");
                ExitCode::FAILURE
            }
        },
    }
}
