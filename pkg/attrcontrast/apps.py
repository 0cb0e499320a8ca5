from django.apps import AppConfig


class AttrcontrastConfig(AppConfig):
    name = 'attrcontrast'
    verbose_name = 'Attribute Contrast'
