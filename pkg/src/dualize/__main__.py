from dualize.cli import main

main()
