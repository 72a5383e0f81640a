fn main() {
    std::process::exit(elastic_shape::cli::run(std::env::args_os()));
}
