"""
Entry point for `python -m ratnet`.
"""


from ratnet.cli import main


if __name__ == '__main__':
    main()
