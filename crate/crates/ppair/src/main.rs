use clap::Parser;

fn main() {
    let cli = ppair::cli::Cli::parse();
    let (output, code) = ppair::cli::run(&cli);
    println!("{output}");
    std::process::exit(code as i32);
}
