fn main() {
    std::process::exit(tupa_mrp::cli::run(std::env::args_os()));
}
