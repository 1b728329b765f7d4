fn main() {
    std::process::exit(hausdorff::cli::execute(std::env::args_os()));
}
