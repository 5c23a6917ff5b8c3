from .api.commands import cli


def main():
    cli(prog_name="dfdam")


if __name__ == "__main__":
    main()
