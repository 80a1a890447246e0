"""Interactive mode for popgraph using questionary prompts."""

import sys

import questionary
from questionary import Style
from rich.console import Console

custom_style = Style([
    ('qmark', 'fg:#E67E22 bold'),
    ('question', 'bold'),
    ('answer', 'fg:#27AE60 bold'),
    ('pointer', 'fg:#E67E22 bold'),
    ('highlighted', 'fg:#E67E22 bold'),
    ('selected', 'fg:#27AE60'),
    ('separator', 'fg:#7F8C8D'),
    ('instruction', 'fg:#7F8C8D'),
])

PROTOCOL_CHOICES = {
    "Tree identification (tree-id)": "tree-id",
    "2-regular identification (kreg-id:k=2)": "kreg-id:k=2",
    "3-regular identification (kreg-id:k=3)": "kreg-id:k=3",
    "Star identification (star-id)": "star-id",
}

COMMAND_CHOICES = {
    "Simulate a run": "run",
    "Check stability exhaustively": "check-stable",
    "Run an impossibility construction": "impossibility",
    "Sweep a graph family": "sweep",
}


def _not_empty(text: str) -> bool | str:
    return len(text.strip()) > 0 or "Value cannot be empty"


def interactive_mode() -> list[str]:
    """Collect the arguments of one subcommand through prompts.

    Returns:
        argv list for the CLI parser, e.g. ['run', '--protocol', 'tree-id', '--graph', 'tree:10:7']
    """
    console = Console()
    console.print()
    console.print("  [bold #E67E22]popgraph[/bold #E67E22] [dim]- Interactive Mode[/dim]")
    console.print()

    try:
        command = COMMAND_CHOICES[questionary.select(
            "What do you want to do?",
            choices=list(COMMAND_CHOICES),
            style=custom_style,
            use_shortcuts=True,
            use_arrow_keys=True,
        ).unsafe_ask()]

        protocol = PROTOCOL_CHOICES[questionary.select(
            "Protocol:",
            choices=list(PROTOCOL_CHOICES),
            style=custom_style,
            use_arrow_keys=True,
        ).unsafe_ask()]
        argv = [command]

        if command == "impossibility":
            kind = questionary.select(
                "Construction:",
                choices=["weak-double", "line-ring", "bipartite", "arbitrary-init"],
                style=custom_style,
                use_arrow_keys=True,
            ).unsafe_ask()
            argv += [kind, "--protocol", protocol]
            if kind in ("weak-double", "arbitrary-init"):
                default = "line:3" if kind == "weak-double" else "ring:4"
                graph = questionary.text("Base graph:", default=default, style=custom_style,
                                         validate=_not_empty).unsafe_ask()
                argv += ["--graph", graph]
            return argv

        if command == "sweep":
            family = questionary.text("Graph family:", default="tree", style=custom_style,
                                      validate=_not_empty).unsafe_ask()
            sizes = questionary.text("Sizes:", default="3..12", style=custom_style, validate=_not_empty).unsafe_ask()
            seeds = questionary.text("Seeds:", default="5", style=custom_style, validate=_not_empty).unsafe_ask()
            argv += ["--protocol", protocol, "--family", family, "--sizes", sizes, "--seeds", seeds]
        else:
            graph = questionary.text("Graph spec:", default="tree:10:7", style=custom_style,
                                     validate=_not_empty).unsafe_ask()
            argv += ["--protocol", protocol, "--graph", graph]
            if command == "run":
                scheduler = questionary.select(
                    "Scheduler:",
                    choices=["random:0", "rr", "rr:oneway"],
                    style=custom_style,
                    use_arrow_keys=True,
                ).unsafe_ask()
                argv += ["--scheduler", scheduler]

        if questionary.confirm("Save output to a file?", default=False, style=custom_style,
                               instruction="(y/n)").unsafe_ask():
            path = questionary.text("Output path:", style=custom_style, validate=_not_empty).unsafe_ask()
            argv += ["--out", path]

        console.print()
        return argv

    except KeyboardInterrupt:
        console.print("\n\n[yellow]Cancelled.[/yellow]")
        sys.exit(0)


def should_use_interactive_mode(argv: list[str]) -> bool:
    """Interactive mode runs when no arguments (or only --interactive) are given."""
    return len(argv) == 0 or argv in (["--interactive"], ["-i"])
