use fdpd_cli::{emit, parse_args, run, ParseError};

fn main() {
    let cfg = match parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(ParseError::Display(text)) => {
            print!("{text}");
            return;
        }
        Err(ParseError::Usage(msg)) => {
            eprintln!("{msg}");
            std::process::exit(1);
        }
    };
    let output = run(&cfg);
    std::process::exit(emit(&cfg, &output));
}
