from rankedtrees.cli import main

main()
