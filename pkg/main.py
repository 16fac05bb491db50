"""Entry point: python main.py --config data/configs/synthetic.yaml pipeline"""

from src.cli import cli

if __name__ == "__main__":
    cli()
