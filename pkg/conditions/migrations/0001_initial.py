# Generated by Django 5.2.6 on 2026-10-17 09:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ConditionArtifact',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('source_id', models.CharField(db_index=True, max_length=128)),
                ('kind', models.CharField(choices=[('segmap', 'Segmentation map'), ('hed', 'HED boundary'), ('scribble', 'Scribble')], max_length=16)),
                ('prompt', models.CharField(max_length=255)),
                ('threshold', models.PositiveSmallIntegerField(default=128)),
                ('detector_id', models.CharField(blank=True, max_length=64)),
                ('resolution', models.PositiveIntegerField(blank=True, help_text='Detector working resolution (long side)', null=True)),
                ('path', models.CharField(max_length=512)),
                ('sha256', models.CharField(max_length=64)),
                ('run_dir', models.CharField(max_length=512)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
            options={
                'db_table': 'condition_artifacts',
                'ordering': ('source_id', 'kind'),
                'constraints': [models.UniqueConstraint(fields=('run_dir', 'source_id', 'kind'), name='unique_condition_per_run')],
            },
        ),
    ]
