fn main() {
    std::process::exit(wedgecrack::cli::run(std::env::args_os()));
}
