fn main() {
    std::process::exit(lfpclass_cli::run(std::env::args_os()));
}
