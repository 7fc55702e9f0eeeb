fn main() {
    env_logger::init();
    std::process::exit(subsampled_tr_bench::cli::main_with_args(std::env::args_os()));
}
