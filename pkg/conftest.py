pytest_plugins = ["hardytree.plugin"]
