fn main() {
    std::process::exit(herdisc::cli::run(std::env::args_os()));
}
