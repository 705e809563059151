fn main() {
    std::process::exit(deflift::cli::main());
}
