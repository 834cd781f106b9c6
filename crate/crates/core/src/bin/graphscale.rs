fn main() {
    std::process::exit(graph_scaling::cli::main_with_env());
}
