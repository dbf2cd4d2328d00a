use nhssh::cli;

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    match cli::parse_config(&args).and_then(|c| cli::run(&c)) {
        Ok(manifest) => {
            for out in &manifest.outputs {
                if !out.sha256.is_empty() {
                    println!("{}  {}", out.sha256, out.path);
                } else {
                    println!("{}", out.path);
                }
            }
        }
        Err(e) => {
            eprintln!("nhssh: {e}");
            std::process::exit(1);
        }
    }
}
