fn main() {
    std::process::exit(sparse_ldp_cli::main_with_args(std::env::args_os()));
}
