# app.py: command line launcher
#
# Usage:
#   python app.py pretrain --train-images train-images-idx3-ubyte --train-labels train-labels-idx1-ubyte \
#       --chi 32 --out model.mpsm
#   python app.py classify --model model.mpsm --test-images ... --test-labels ...
from src.cli.app import run

if __name__ == "__main__":
    run()
