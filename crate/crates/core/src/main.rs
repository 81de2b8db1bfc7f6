fn main() {
    visual_concepts::cli::main()
}
