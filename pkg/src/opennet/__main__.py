from opennet.cli import main

main()
