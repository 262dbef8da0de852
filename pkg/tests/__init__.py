import os
os.environ['ENV'] = os.environ.get('ENV') or 'test'
